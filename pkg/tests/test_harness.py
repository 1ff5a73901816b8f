import csv
import json

import numpy as np
import pytest

from decopt.config import SCHEMA, ExperimentConfig, load_config, parse_config
from decopt.errors import ConfigError, DisconnectedGraphError
from decopt.harness import build_graph, build_problem, run_experiment, sweep
from decopt.plot import emit_plot, plot_directory, render_svg
from decopt.trace import TRACE_COLUMNS, TraceRecord, read_trace_csv, trace_to_csv, write_trace_csv

SMALL = """
network.topology = er
network.m = 6
network.p = 0.6
network.seed = 1
problem.family = logistic
problem.n_per_agent = 12
problem.d = 4
problem.seed = 2
problem.sigma.mode = uniform
problem.sigma.value = 0.05
T = 60
method.mudag.K = 3
tuning.k_max = 6
"""


@pytest.fixture
def small_cfg():
    return parse_config(SMALL)


class TestConfig:
    def test_defaults_and_values(self, small_cfg):
        assert small_cfg["network.m"] == 6
        assert small_cfg["method.mudag.K"] == 3
        assert small_cfg["methods"] == ("mudag", "agd", "dgd", "extra", "nids")
        assert small_cfg["method.extra.step_size"] == "tuned"

    def test_round_trip(self, small_cfg):
        assert parse_config(small_cfg.to_text()).values == small_cfg.values

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("network.m 5", "line 1"),
            ("network.q = 5", "unknown key"),
            ("network.m = five", "bad value"),
            ("T = 5\nT = 6", "duplicate"),
            ("methods = mudag, adam", "unknown methods"),
            ("method.mudag.K = -2", "bad value"),
            ("problem.sigma.mode = nonconvex\nproblem.sigma.a = -0.01\nproblem.sigma.b = 0.01", "strongly convex"),
            ("network.m = 1", "at least 2"),
            ("eps = 2", "eps"),
        ],
    )
    def test_errors(self, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            parse_config(text)

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# header\n\nT = 7  # inline\n")
        assert cfg["T"] == 7

    def test_with_values(self, small_cfg):
        assert small_cfg.with_values(network__p=0.9)["network.p"] == 0.9
        with pytest.raises(ConfigError):
            small_cfg.with_values(network__q=1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.cfg")

    def test_schema_defaults_parse(self):
        cfg = ExperimentConfig()
        for key in SCHEMA:
            cfg[key]


class TestBuilders:
    def test_graph_kinds(self, small_cfg, tmp_path):
        assert build_graph(small_cfg).m == 6
        assert build_graph(small_cfg.with_values(network__topology="ring")).num_edges == 6
        path = tmp_path / "g.txt"
        build_graph(small_cfg.with_values(network__topology="star")).save(path)
        assert build_graph(small_cfg.with_values(network__topology=str(path))).num_edges == 5
        with pytest.raises(ConfigError):
            build_graph(small_cfg.with_values(network__topology="nowhere.txt"))
        with pytest.raises(ConfigError):
            build_graph(small_cfg.with_values(network__topology=str(path), network__m=7))

    def test_problem_kinds(self, small_cfg, tmp_path):
        p = build_problem(small_cfg)
        assert (p.m, p.d) == (6, 4) and p.constants.mu == pytest.approx(0.05)
        q = build_problem(small_cfg.with_values(problem__family="quadratic", problem__kappa=10.0))
        assert q.constants.kappa_g == pytest.approx(10.0)
        nc = build_problem(small_cfg.with_values(problem__sigma__mode="nonconvex", problem__sigma__a=-0.01, problem__sigma__b=1.0))
        assert nc.constants.nu is None

    def test_libsvm_source(self, small_cfg, tmp_path):
        rng = np.random.default_rng(0)
        lines = []
        for _ in range(80):
            feats = " ".join(f"{k + 1}:{rng.standard_normal():.4f}" for k in range(4))
            lines.append(f"{rng.choice(['+1', '-1'])} {feats}")
        path = tmp_path / "toy.libsvm"
        path.write_text("\n".join(lines) + "\n")
        p = build_problem(small_cfg.with_values(problem__data=str(path)))
        assert p.m == 6 and p.datasets[0].n == 12


class TestRunExperiment:
    def test_outputs(self, small_cfg, tmp_path):
        res = run_experiment(small_cfg, tmp_path)
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["agd.csv", "dgd.csv", "extra.csv", "manifest.json", "mudag.csv", "nids.csv"]
        man = json.loads((tmp_path / "manifest.json").read_text())
        c = man["constants"]
        assert c["mu"] <= c["L"] <= c["M"]
        assert man["seeds"] == {"network": 1, "problem": 2}
        assert man["methods"]["mudag"]["hyperparameters"]["K"] == 3
        assert man["methods"]["extra"]["hyperparameters"]["tuned"] is True
        trace = read_trace_csv(tmp_path / "mudag.csv")
        assert [r.comm_rounds for r in trace] == [3 * r.t for r in trace]
        assert [r.grad_evals for r in trace] == [r.t for r in trace]
        assert res.outcomes["mudag"].status == "ok"

    def test_constants_recompute_on_reload(self, small_cfg, tmp_path):
        run_experiment(small_cfg, tmp_path)
        man = json.loads((tmp_path / "manifest.json").read_text())
        again = parse_config("\n".join(f"{k} = {v if not isinstance(v, list) else ', '.join(v)}" for k, v in man["config"].items()))
        assert build_problem(again).constants.as_dict() == pytest.approx(man["constants"])

    def test_byte_identical_reruns(self, small_cfg, tmp_path):
        run_experiment(small_cfg, tmp_path / "a")
        run_experiment(small_cfg, tmp_path / "b")
        for name in ("mudag.csv", "extra.csv", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_empty_method_list_writes_manifest_only(self, tmp_path):
        cfg = parse_config(SMALL).with_values(methods=())
        run_experiment(cfg, tmp_path)
        assert [p.name for p in tmp_path.iterdir()] == ["manifest.json"]

    def test_divergent_method_recorded_and_others_continue(self, small_cfg, tmp_path):
        cfg = small_cfg.with_values(method__extra__step_size=1e4, methods=("extra", "mudag"))
        res = run_experiment(cfg, tmp_path)
        extra = res.manifest["methods"]["extra"]
        assert extra["status"] == "diverged" and extra["diverged_at"] is not None
        assert (tmp_path / "extra.csv").exists()
        assert res.manifest["methods"]["mudag"]["status"] == "ok"

    def test_theoretical_and_auto_K(self, small_cfg):
        res = run_experiment(small_cfg.with_values(method__mudag__K="theoretical", methods=("mudag",), T=20))
        hyper = res.manifest["methods"]["mudag"]["hyperparameters"]
        assert hyper["K_mode"] == "theoretical" and hyper["K"] >= 1 and "rho" in hyper
        res = run_experiment(small_cfg.with_values(method__mudag__K="auto", methods=("mudag",)))
        assert 1 <= res.manifest["methods"]["mudag"]["hyperparameters"]["K"] <= 8

    def test_disconnected_network_propagates(self, small_cfg):
        with pytest.raises(DisconnectedGraphError):
            run_experiment(small_cfg.with_values(network__p=0.001))


class TestSweep:
    def test_K_axis(self, small_cfg, tmp_path):
        cfg = small_cfg.with_values(methods=("mudag",), T=150)
        rows = sweep(cfg, "K", [1, 2, 4], tmp_path)
        assert [r["value"] for r in rows] == [1, 2, 4]
        with open(tmp_path / "summary.csv") as fh:
            table = list(csv.DictReader(fh))
        assert len(table) == 3 and table[0]["axis"] == "K"
        comm = [r["comm_to_eps"] for r in rows]
        assert all(c is not None for c in comm[1:])

    def test_single_value_matches_run(self, small_cfg, tmp_path):
        cfg = small_cfg.with_values(methods=("mudag", "agd"))
        rows = sweep(cfg, "p", [0.6], tmp_path / "s")
        run_experiment(cfg, tmp_path / "r")
        for name in ("mudag.csv", "agd.csv"):
            assert (tmp_path / "s" / "p=0.6" / name).read_bytes() == (tmp_path / "r" / name).read_bytes()
        assert len(rows) == 2

    def test_sigma_axis_and_errors(self, small_cfg):
        rows = sweep(small_cfg.with_values(methods=("agd",)), "sigma", [0.1])
        assert rows[0]["status"] == "ok"
        with pytest.raises(ConfigError):
            sweep(small_cfg, "T", [1])
        with pytest.raises(ConfigError):
            sweep(small_cfg, "K", [])


class TestTraceIO:
    def test_round_trip(self, tmp_path):
        trace = [TraceRecord(0, 1.5, 0.1, 2.0, None, 0, 0), TraceRecord(1, 0.1 + 0.2, 0.0, 1e-300, 3.0, 1, 4)]
        path = write_trace_csv(trace, tmp_path / "t.csv")
        assert read_trace_csv(path) == trace
        assert trace_to_csv(trace).splitlines()[0] == ",".join(TRACE_COLUMNS)

    def test_bad_files(self, tmp_path):
        (tmp_path / "empty.csv").write_text("")
        (tmp_path / "header.csv").write_text(",".join(TRACE_COLUMNS) + "\n")
        (tmp_path / "cols.csv").write_text("a,b\n1,2\n")
        for name in ("empty.csv", "header.csv", "cols.csv"):
            with pytest.raises(ValueError):
                read_trace_csv(tmp_path / name)


class TestPlot:
    def trace(self, gaps):
        return [TraceRecord(t, g, 0.0, 0.0, None, t, 2 * t) for t, g in enumerate(gaps)]

    def test_monotone_polyline(self):
        svg = render_svg({"a": self.trace([1.0, 0.1, 0.01, 0.0])}, "grad_evals")
        pts = svg.split('points="')[1].split('"')[0].split()
        ys = [float(p.split(",")[1]) for p in pts]
        assert ys == sorted(ys) and len(ys) == 4

    def test_deterministic_and_labelled(self, tmp_path):
        write_trace_csv(self.trace([1.0, 0.5]), tmp_path / "mudag.csv")
        write_trace_csv(self.trace([1.0, 0.9]), tmp_path / "extra.csv")
        a = plot_directory(tmp_path, "comm_rounds").read_bytes()
        b = plot_directory(tmp_path, "comm_rounds").read_bytes()
        assert a == b and b"mudag" in a and b"extra" in a

    def test_errors(self, tmp_path):
        with pytest.raises(ValueError):
            render_svg({}, "grad_evals")
        with pytest.raises(ValueError):
            render_svg({"a": []}, "grad_evals")
        with pytest.raises(ValueError):
            render_svg({"a": self.trace([1.0])}, "wall_time")
        (tmp_path / "zero.csv").write_text("")
        with pytest.raises(ValueError):
            emit_plot([tmp_path / "zero.csv"], "grad_evals", tmp_path / "o.svg")
        with pytest.raises(ValueError):
            plot_directory(tmp_path / "nothing", "grad_evals")
