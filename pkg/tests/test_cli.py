import pytest
import yaml

from sipdg.cli_app import execute, main, parse_sigmas
from sipdg.config.config import AppArgs
from sipdg.controllers.cli_controller import CLIController
from sipdg.models.common.error_models import ExperimentError
from sipdg.models.domain.mesh_io import read_mesh


@pytest.fixture
def controller():
    return CLIController()


@pytest.fixture
def fast_config(tmp_path):
    """Coarse base meshes and lattices so end-to-end runs stay quick."""
    config_file = tmp_path / "fast.yml"
    config_file.write_text(yaml.dump({
        "sampling": {"lattice_resolution": 6, "dense_lattice_resolution": 8},
        "experiments": {"convergence_base_n": 2, "wmp_square_n": [2, 4]},
    }))
    return str(config_file)


def _stderr_of_failure(argv, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code, capsys.readouterr().err


class TestParseArguments:

    def test_mesh(self, controller):
        args = controller.parse_arguments(["mesh", "--domain", "lshape", "--n", "4", "--out", "m.txt"])
        assert isinstance(args, AppArgs)
        assert (args.command, args.domain, args.n, args.out) == ("mesh", "lshape", 4, "m.txt")

    def test_mesh_requires_n_and_out(self, controller):
        with pytest.raises(SystemExit):
            controller.parse_arguments(["mesh", "--n", "4"])

    def test_wmp_defaults(self, controller):
        args = controller.parse_arguments(["wmp"])
        assert args.domain == "square"
        assert args.n is None
        assert args.degree == 1
        assert args.sigma is None
        assert args.log_level == "WARN"

    def test_wmp_rejects_cubic(self, controller):
        with pytest.raises(SystemExit):
            controller.parse_arguments(["wmp", "--degree", "3"])

    def test_wmp_options(self, controller):
        args = controller.parse_arguments(["wmp", "-d", "lshape", "-n", "9", "-r", "2", "--sigma-sweep", "5,10,40",
                                           "--csv", "out.csv", "--export-matrix", "a.txt"])
        assert args.degree == 2
        assert args.sigma_sweep == "5,10,40"
        assert args.csv == "out.csv"
        assert args.export_matrix == "a.txt"

    def test_convergence_defaults(self, controller):
        args = controller.parse_arguments(["convergence"])
        assert args.levels == 5
        assert args.problem == "manufactured"
        assert args.plot_data is None

    def test_convergence_rejects_problem_without_exact_solution(self, controller):
        with pytest.raises(SystemExit):
            controller.parse_arguments(["convergence", "--problem", "wmp_boundary"])

    def test_interior(self, controller):
        args = controller.parse_arguments(["interior", "--rect=-0.9,0.3,-0.3,0.9", "--degree", "2",
                                           "--log-format", "json", "-q"])
        assert args.domain == "lshape"
        assert args.levels == 4
        assert args.rect == "-0.9,0.3,-0.3,0.9"
        assert args.quiet is True
        assert args.log_format == "json"

    def test_log_options(self, controller):
        args = controller.parse_arguments(["wmp", "--log-level", "debug", "--log-format", "JSON"])
        assert args.log_level == "DEBUG"
        assert args.log_format == "json"

    def test_unknown_log_format(self, controller):
        with pytest.raises(SystemExit):
            controller.parse_arguments(["wmp", "--log-format", "xml"])

    def test_version(self, controller, capsys):
        with pytest.raises(SystemExit) as excinfo:
            controller.parse_arguments(["--version"])
        assert excinfo.value.code == 0
        assert capsys.readouterr().out.startswith("sipdg v")

    def test_subcommand_required(self, controller):
        with pytest.raises(SystemExit):
            controller.parse_arguments([])


class TestHelpers:

    def test_parse_sigmas(self):
        assert parse_sigmas("5, 10,40") == [5.0, 10.0, 40.0]

    @pytest.mark.parametrize("text", ["", "5,abc", ","])
    def test_parse_sigmas_invalid(self, text):
        with pytest.raises(ExperimentError):
            parse_sigmas(text)

    def test_execute_returns_metadata(self, tmp_path):
        out = tmp_path / "mesh.txt"
        metadata = execute(AppArgs(command="mesh", n=2, out=str(out), quiet=True))
        assert metadata.command == "mesh"
        assert metadata.parameters["n"] == 2
        assert "log_level" not in metadata.parameters
        assert metadata.wall_time >= 0


class TestMain:

    def test_mesh_writes_file(self, tmp_path, capsys):
        out = tmp_path / "square.txt"
        main(["mesh", "--n", "3", "--out", str(out)])
        mesh = read_mesh(str(out))
        assert mesh.n_triangles == 18
        assert "vertices=16 triangles=18" in capsys.readouterr().out

    def test_wmp_csv(self, tmp_path, capsys, fast_config):
        out = tmp_path / "wmp.csv"
        main(["wmp", "--config", fast_config, "--n", "4", "--csv", str(out)])
        lines = out.read_text().splitlines()
        assert lines[0] == "domain,h,r,sigma,min_omega,min_boundary,max_omega,max_boundary"
        assert len(lines) == 2
        assert lines[1].startswith("square,")
        assert "extrema gap=" in capsys.readouterr().out

    def test_wmp_uses_configured_resolutions(self, tmp_path, fast_config):
        out = tmp_path / "wmp.csv"
        main(["wmp", "--config", fast_config, "--csv", str(out), "-q"])
        assert len(out.read_text().splitlines()) == 3

    def test_wmp_sigma_sweep(self, tmp_path, fast_config):
        out = tmp_path / "sweep.csv"
        main(["wmp", "--config", fast_config, "--n", "2", "--sigma-sweep", "10,20", "--csv", str(out), "-q"])
        rows = out.read_text().splitlines()[1:]
        assert [row.split(",")[3] for row in rows] == ["1.000000000000e+01", "2.000000000000e+01"]

    def test_convergence_csv_and_plot_data(self, tmp_path, capsys, fast_config):
        csv_file = tmp_path / "conv.csv"
        plot_file = tmp_path / "conv.dat"
        main(["convergence", "--config", fast_config, "--levels", "3", "--csv", str(csv_file),
              "--plot-data", str(plot_file)])
        lines = csv_file.read_text().splitlines()
        assert lines[0] == "level,h,dofs,linf,l2,brokenH1,rate_linf"
        assert len(lines) == 4
        assert lines[1].endswith(",")
        assert plot_file.read_text().splitlines()[-1].startswith("# slope=")
        assert "asymptotic rate linf:" in capsys.readouterr().out

    @pytest.mark.parametrize("command", [
        ["convergence", "--levels", "3"],
        ["wmp", "--n", "4"],
        ["wmp", "--n", "2", "--sigma-sweep", "10,40"],
    ])
    def test_csv_is_deterministic(self, tmp_path, fast_config, command):
        first = tmp_path / "first.csv"
        second = tmp_path / "second.csv"
        for target in (first, second):
            main([*command, "--config", fast_config, "--csv", str(target), "-q"])
        assert first.read_bytes() == second.read_bytes()

    def test_too_few_levels(self, capsys):
        code, err = _stderr_of_failure(["convergence", "--levels", "2"], capsys)
        assert code == 2
        assert err.startswith("error: EXPERIMENT_INVALID:")
        assert len(err.strip().splitlines()) == 1

    def test_missing_output_directory(self, tmp_path, capsys, fast_config):
        target = tmp_path / "missing" / "wmp.csv"
        code, err = _stderr_of_failure(["wmp", "--config", fast_config, "--n", "2", "--csv", str(target)], capsys)
        assert code == 1
        assert err.startswith("error: OUTPUT_DIRECTORY_MISSING:")

    def test_missing_config_file(self, tmp_path, capsys):
        code, err = _stderr_of_failure(["wmp", "--config", str(tmp_path / "nope.yml"), "--n", "2"], capsys)
        assert code == 2
        assert err.startswith("error: CONFIG_INVALID:")

    def test_small_penalty_reported(self, capsys):
        code, err = _stderr_of_failure(["wmp", "--n", "4", "--sigma", "0.001"], capsys)
        assert code == 2
        assert err.startswith("error: PENALTY_TOO_SMALL:")

    def test_export_matrix_needs_single_resolution(self, tmp_path, capsys, fast_config):
        code, err = _stderr_of_failure(["wmp", "--config", fast_config, "--export-matrix",
                                        str(tmp_path / "a.txt")], capsys)
        assert code == 2
        assert "EXPERIMENT_INVALID" in err

    @pytest.mark.parametrize("rect,category", [
        ("1,2,3", "SUBDOMAIN_EMPTY"),
        ("0.3,0.3,0.2,0.9", "SUBDOMAIN_EMPTY"),
        ("0.05,0.05,0.5,0.5", "EXPERIMENT_INVALID"),
        ("0.5,-0.9,0.9,-0.5", "SUBDOMAIN_EMPTY"),
    ])
    def test_invalid_interior_rectangle(self, capsys, fast_config, rect, category):
        code, err = _stderr_of_failure(["interior", "--config", fast_config, "--levels", "3", f"--rect={rect}"],
                                       capsys)
        assert code == 2
        assert err.startswith(f"error: {category}:")

    def test_mesh_into_missing_directory(self, tmp_path, capsys):
        target = tmp_path / "missing" / "square.txt"
        code, err = _stderr_of_failure(["mesh", "--n", "2", "--out", str(target)], capsys)
        assert code == 1
        assert err.startswith("error: OUTPUT_DIRECTORY_MISSING:")
        assert len(err.strip().splitlines()) == 1

    def test_export_matrix_into_missing_directory(self, tmp_path, capsys, fast_config):
        target = tmp_path / "missing" / "a.txt"
        code, err = _stderr_of_failure(["wmp", "--config", fast_config, "--n", "2", "--export-matrix", str(target)],
                                       capsys)
        assert code == 1
        assert err.startswith("error: OUTPUT_DIRECTORY_MISSING:")

    @pytest.mark.parametrize("command", ["convergence", "interior"])
    def test_degree_beyond_quadrature_rules(self, capsys, fast_config, command):
        code, err = _stderr_of_failure([command, "--config", fast_config, "--levels", "3", "--degree", "6"], capsys)
        assert code == 2
        assert err.startswith("error: EXPERIMENT_INVALID:")
        assert "degree r" in err and "got 6" in err
        assert len(err.strip().splitlines()) == 1

    @pytest.mark.parametrize("argv", [
        [],
        ["frobnicate"],
        ["wmp", "--degree", "3"],
        ["convergence", "--degree", "two"],
        ["convergence", "--no-such-option"],
        ["mesh", "--n", "4"],
    ])
    def test_usage_errors_are_one_line(self, capsys, argv):
        code, err = _stderr_of_failure(argv, capsys)
        assert code == 2
        assert err.startswith("error: USAGE_INVALID:")
        assert len(err.strip().splitlines()) == 1
