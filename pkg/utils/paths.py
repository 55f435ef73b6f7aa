from pathlib import Path


class OutputPaths:
    """
    Output locations of one invocation.

    - out is None → CSV goes to stdout, no side files are written
    - otherwise every side file sits next to the CSV and shares its stem
    """

    def __init__(self, out=None):
        self.out = Path(out).resolve() if out else None

        if self.out is None:
            self.run_root = None
            self.log_file = None
            self.metrics_file = None
            self.state_file = None
            self.table_csv = None
            self.table_text = None
            self.plot_script = None
            return

        self.run_root = self.out.parent
        stem = self.out.stem

        # =====================================================
        # LOGGING / METRICS / STATE
        # =====================================================
        self.log_file = self.run_root / f"{stem}.log"
        self.metrics_file = self.run_root / f"{stem}.metrics.json"
        self.state_file = self.run_root / f"{stem}.state.json"

        # =====================================================
        # STUDY TABLE / PLOTTING
        # =====================================================
        self.table_csv = self.run_root / f"{stem}.estimates.csv"
        self.table_text = self.run_root / f"{stem}.estimates.txt"
        self.plot_script = self.run_root / f"{stem}_plots.py"

        self._create_dirs()

    @property
    def to_stdout(self) -> bool:
        return self.out is None

    def _create_dirs(self):
        self.run_root.mkdir(parents=True, exist_ok=True)

    def summary(self):
        if self.out is None:
            return {"out": "<stdout>"}

        return {
            "out": str(self.out),
            "log": str(self.log_file),
            "metrics": str(self.metrics_file),
            "state": str(self.state_file),
        }
