from copy import deepcopy
import traceback
import json
import sys

from utils.paths import OutputPaths
from utils.logger import setup_logger, save_metrics_json
from core.cell_runner import CellRunner

from stages.bench.records import read_records, records_from_frame, write_records
from stages.bench.accuracy import accuracy_experiment
from stages.bench.speed import speed_experiment
from stages.bench.stationary_table import stationary_time_table
from stages.bench.probe import probe_experiment
from stages.bench.study import study_experiment


class ExperimentRunner:

    def __init__(self, config, out=None):

        self.paths = OutputPaths(out)
        self.logger = setup_logger(self.paths.log_file, config["logging"]["level"])
        self.cell_runner = CellRunner(self.logger)

        self.config = deepcopy(config)

        self.state_path = self.paths.state_file
        self.state = self._load_state()

    # =====================================================
    # STATE
    # =====================================================
    def _load_state(self):
        if self.state_path is not None and self.state_path.exists():
            try:
                return json.loads(self.state_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                return {}
        return {}

    def _save_state(self):
        if self.state_path is None:
            return
        self.state_path.write_text(json.dumps(self.state, indent=2), encoding="utf-8")

    def _can_skip(self, name):
        return (
            self.config["bench"].get("resume", False)
            and self.state.get(name) == "complete"
            and self.paths.out is not None
            and self.paths.out.exists()
        )

    # =====================================================
    # EXECUTION
    # =====================================================
    def _execute_stage(self, name, fn, *args, **kwargs):

        self.logger.info(f"===== START: {name} =====")

        try:
            result = fn(*args, **kwargs)

            self.state[name] = "complete"
            self._save_state()

            self.logger.info(f"===== END: {name} =====")
            return result

        except Exception as e:
            self.state[name] = "failed"
            self._save_state()

            self.logger.error(f"FAILED {name}: {e}")
            self.logger.debug(traceback.format_exc())
            raise

    # =====================================================
    # MAIN
    # =====================================================
    def run(self, cfg):
        """Run one experiment, write its records, return the records."""

        self.logger.info(f"---- {cfg.experiment.upper()} ----")

        args = (cfg, self.config, self.cell_runner, self.logger)
        name = cfg.experiment.upper()

        if self._can_skip(name):
            self.logger.info(f"[SKIP] {name}")
            records = records_from_frame(read_records(self.paths.out))
            self._finalize(cfg, records)
            return records

        if cfg.experiment == "accuracy":
            records = self._execute_stage(name, accuracy_experiment, *args)
        elif cfg.experiment == "speed":
            records = self._execute_stage(name, speed_experiment, *args)
        elif cfg.experiment == "stationary":
            records = self._execute_stage(name, stationary_time_table, *args)
        elif cfg.experiment == "probe":
            records = self._execute_stage(name, probe_experiment, *args)
        elif cfg.experiment == "study":
            records, _ = self._execute_stage(name, study_experiment, *args, paths=self.paths)
        else:
            raise ValueError(f"Unknown experiment: {cfg.experiment}")

        self._write(records)
        self._finalize(cfg, records)

        return records

    # =====================================================
    # OUTPUT
    # =====================================================
    def _write(self, records):
        text = write_records(records, None if self.paths.to_stdout else self.paths.out)

        if self.paths.to_stdout:
            sys.stdout.write(text)
        else:
            self.logger.info(f"Wrote {len(records)} records → {self.paths.out}")

    def _finalize(self, cfg, records):
        if self.paths.metrics_file is None:
            return

        stats = {
            "experiment": cfg.experiment,
            "records": len(records),
            "failed_cells": sum(r.metric == "failed" for r in records),
            "norm1_aggregation": "sum of absolute entry errors, mean over endpoint draws",
        }
        save_metrics_json(self.paths.metrics_file, stats, self.config, self.logger)
