import vis
from stages.bench.records import BenchRecord, write_records


def test_plots_from_records(tmp_path):
    records = [BenchRecord("stationary", "none", n, float("nan"), "stationary_time", rho)
               for n, rho in ((3, 3.25), (4, 4.4), (5, 5.5))]

    for method in ("rej", "tir"):
        for n in (3, 4):
            records.append(BenchRecord("accuracy", method, n, 3.25, "N_norm1", 0.05, 0.01))
            records.append(BenchRecord("accuracy", method, n, 3.25, "R_norm1", 0.02, 0.005))
        for T in (1.0, 2.0):
            records.append(BenchRecord("speed", method, 3, T, "seconds_per_bridge", 1e-4 * T))

    path = tmp_path / "bench.csv"
    write_records(records, path)

    outputs = vis.run(path)

    assert [p.name for p in outputs] == ["stationary.png", "accuracy.png", "speed.png"]
    assert all(p.exists() for p in outputs)
    assert outputs[0].parent == tmp_path / "bench_plots"


def test_unknown_method_gets_default_color():
    assert vis.get_color("TIR") == vis.COLOR_MAP["tir"]
    assert vis.get_color("other") == vis.COLOR_MAP["default"]
