import time
import traceback


class CellRunner:
    """
    Executes one benchmark cell with monotonic timing.

    Result contract (same for success and recorded failure):
        {"elapsed": seconds | None, "success": bool, "result": value | None, "error": str | None}
    """

    def __init__(self, logger):
        self.logger = logger

    def run(self, fn, *args, stage: str = "unknown", allow_failure: bool = False,
            quiet: bool = False, **kwargs):

        if not quiet:
            self.logger.debug(f"[{stage}] START")

        start_time = time.perf_counter()

        try:
            result = fn(*args, **kwargs)

        except Exception as e:
            msg = f"[{stage}] FAILED: {type(e).__name__}: {e}"
            self.logger.error(msg)
            self.logger.debug(traceback.format_exc())

            if not allow_failure:
                raise

            return {
                "elapsed": None,
                "success": False,
                "result": None,
                "error": f"{type(e).__name__}: {e}",
            }

        # ----------------------------------------
        # Final status
        # ----------------------------------------
        elapsed = time.perf_counter() - start_time

        if not quiet:
            self.logger.info(f"[{stage}] Finished in {elapsed:.2f}s")

        return {
            "elapsed": elapsed,
            "success": True,
            "result": result,
            "error": None,
        }
