from unittest.mock import patch

import pandas as pd
import pytest
from metrics.plot import main, parse_args


def sweep_frame(**extra):
    data = {
        "N": [92, 46, 184],
        "k": [979, 243, 3917],
        "value": ["0.01", "0.02", "0.004"],
        "error_bound": [2.9, 5.9, 1.4],
        "elapsed_ms": [40.0, 10.0, 170.0],
    }
    data.update(extra)
    return pd.DataFrame(data)


class TestParseArgs:
    def test_parse_args_with_csv(self):
        with patch("sys.argv", ["prog", "--csv", "/path/to/sweep.csv"]):
            args = parse_args()
            assert args.csv == "/path/to/sweep.csv"
            assert args.reference is None

    def test_parse_args_reference(self):
        with patch("sys.argv", ["prog", "--csv", "sweep.csv", "--reference", "0.09"]):
            assert parse_args().reference == 0.09

    def test_parse_args_missing_csv(self):
        with patch("sys.argv", ["prog"]):
            with pytest.raises(SystemExit):
                parse_args()


class TestMain:
    @patch("metrics.plot.plt.savefig")
    @patch("metrics.plot.plt.loglog")
    @patch("metrics.plot.plt.figure")
    @patch("metrics.plot.pd.read_csv")
    def test_main_success(self, mock_read_csv, mock_figure, mock_loglog, mock_savefig, tmp_path, capsys):
        mock_read_csv.return_value = sweep_frame()
        csv_path = tmp_path / "sweep.csv"
        csv_path.touch()

        with patch("sys.argv", ["prog", "--csv", str(csv_path)]):
            main()

        captured = capsys.readouterr()
        assert captured.out.count("Saved:") == 2
        assert "sweep_error.png" in captured.out
        assert "sweep_time.png" in captured.out
        assert mock_savefig.call_count == 2
        # bound and time only
        assert mock_loglog.call_count == 2
        assert list(mock_loglog.call_args_list[0].args[0]) == [46, 92, 184]

    @patch("metrics.plot.plt.savefig")
    @patch("metrics.plot.plt.loglog")
    @patch("metrics.plot.plt.figure")
    @patch("metrics.plot.pd.read_csv")
    def test_main_reference_adds_error_curve(self, mock_read_csv, mock_figure, mock_loglog, mock_savefig, tmp_path):
        mock_read_csv.return_value = sweep_frame()
        csv_path = tmp_path / "sweep.csv"
        csv_path.touch()

        with patch("sys.argv", ["prog", "--csv", str(csv_path), "--reference", "0.0"]):
            main()

        assert mock_loglog.call_count == 3
        errors = list(mock_loglog.call_args_list[1].args[1])
        assert errors == pytest.approx([0.02, 0.01, 0.004])

    @patch("metrics.plot.plt.savefig")
    @patch("metrics.plot.plt.loglog")
    @patch("metrics.plot.plt.figure")
    @patch("metrics.plot.pd.read_csv")
    def test_main_without_timings(self, mock_read_csv, mock_figure, mock_loglog, mock_savefig, tmp_path):
        mock_read_csv.return_value = sweep_frame(abs_error=[0.01, 0.02, 0.004]).drop(columns=["elapsed_ms"])
        csv_path = tmp_path / "sweep.csv"
        csv_path.touch()

        with patch("sys.argv", ["prog", "--csv", str(csv_path)]):
            main()

        assert mock_savefig.call_count == 1
        assert mock_loglog.call_count == 2

    def test_main_missing_csv(self, tmp_path):
        with patch("sys.argv", ["prog", "--csv", str(tmp_path / "absent.csv")]):
            with pytest.raises(FileNotFoundError, match="Missing convergence CSV"):
                main()
