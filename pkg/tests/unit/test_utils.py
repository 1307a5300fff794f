import pytest
import typer
import yaml
from pydantic import BaseModel, Field

from nesphere.errors import ConvergenceError, DataError, UsageError
from nesphere.utils import Report, handle_errors, read_tokens, tsv


class Positive(BaseModel):
    value: int = Field(gt=0)


class TestHandleErrors:
    @pytest.mark.parametrize(
        ("error", "code"),
        [
            (UsageError("bad flag"), 1),
            (DataError("bad file"), 2),
            (ConvergenceError("no luck"), 3),
            (FileNotFoundError("missing.txt"), 2),
            (yaml.YAMLError("broken"), 1),
        ],
    )
    def test_exit_codes(self, error, code):
        @handle_errors
        def command():
            raise error

        with pytest.raises(typer.Exit) as exc_info:
            command()
        assert exc_info.value.exit_code == code

    def test_validation_error_is_a_data_error(self):
        @handle_errors
        def command():
            Positive(value=-1)

        with pytest.raises(typer.Exit) as exc_info:
            command()
        assert exc_info.value.exit_code == 2

    def test_error_message_printed(self, mocker):
        print_error = mocker.patch("nesphere.utils.display.print_error")

        @handle_errors
        def command():
            raise DataError("vectors.txt:3: wrong arity")

        with pytest.raises(typer.Exit):
            command()
        print_error.assert_called_once_with("vectors.txt:3: wrong arity")

    def test_passes_results_through(self):
        @handle_errors
        def command(x):
            """Doubles."""
            return 2 * x

        assert command(4) == 8
        assert command.__name__ == "command"
        assert command.__doc__ == "Doubles."

    def test_unexpected_errors_propagate(self):
        @handle_errors
        def command():
            raise KeyError("bug")

        with pytest.raises(KeyError):
            command()


class TestReport:
    def test_emit_to_file_writes_manifest(self, temp_dir):
        source = temp_dir / "input.txt"
        source.write_text("1 1\na 0\n")
        report = Report("eval", {"type": "PER"}, [source], seed=5)
        out = temp_dir / "out.tsv"
        report.emit(tsv(report.header, "a\tb", ["1\t2"]), out)

        assert out.read_text().splitlines() == [report.header, "a\tb", "1\t2"]
        manifest = yaml.safe_load((temp_dir / "out.tsv.manifest.yaml").read_text())
        assert manifest["command"] == "eval"
        assert manifest["seed"] == 5
        assert manifest["digest"] in report.header

    def test_emit_to_stdout(self, temp_dir, capsys):
        report = Report("neighbors", {}, [])
        report.emit("x\n", None)
        assert capsys.readouterr().out == "x\n"
        assert list(temp_dir.iterdir()) == []


class TestReadTokens:
    def test_merges_flags_and_file(self, temp_dir):
        path = temp_dir / "tokens.txt"
        path.write_text("# queries\nBerlin\n\n  Paris \n")
        assert read_tokens(["London"], path) == ["London", "Berlin", "Paris"]

    def test_nothing_given(self):
        assert read_tokens(None, None) == []
