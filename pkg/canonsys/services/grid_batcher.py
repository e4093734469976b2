import asyncio
import logging
import time
from typing import Any, Callable, List, Optional, Sequence

from prometheus_client import Counter, Gauge, Summary
from tenacity import AsyncRetrying, retry_if_exception_type, stop_after_attempt

from canonsys.core.config import settings
from canonsys.core.errors import (
    NumericFailure,
    WeylAtInfinity,
    WeylIndeterminate,
    WeylNonConvergence,
)
from canonsys.models import CellOutcome

logger = logging.getLogger(__name__)

GRID_CELL_LATENCY = Summary(
    "grid_cell_latency_seconds", "Wall time per grid cell, retries included"
)
GRID_CELLS_IN_FLIGHT = Gauge("grid_cells_in_flight", "Grid cells currently running")
GRID_CELL_FAILURES = Counter(
    "grid_cell_failures_total", "Grid cells that ended without a value", ["status"]
)

# a cell receives the integration horizon of its current attempt
Cell = Callable[[float], Any]


class GridBatcher:
    """
    GridBatcher evaluates independent grid cells in worker threads.
    -at most max_concurrency cells in flight (semaphore)
    -WeylNonConvergence is retried, each attempt with t_max grown by horizon_growth
    -cells that still fail, for any reason, are recorded with a status, the grid carries on
    -results come back in input order
    """

    def __init__(
        self,
        max_concurrency: Optional[int] = None,
        retry_attempts: Optional[int] = None,
        horizon_growth: Optional[float] = None,
    ):
        self.max_concurrency = max_concurrency or settings.max_concurrency
        self.retry_attempts = retry_attempts or settings.retry_attempts
        self.horizon_growth = horizon_growth or settings.horizon_growth

    def horizon(self, t_max: float, attempt: int) -> float:
        return t_max * self.horizon_growth ** (attempt - 1)

    async def _run_with_retries(self, index: int, cell: Cell, t_max: float) -> CellOutcome:
        attempts = 0
        horizon = t_max
        async for attempt in AsyncRetrying(
            stop=stop_after_attempt(self.retry_attempts),
            retry=retry_if_exception_type(WeylNonConvergence),
            reraise=True,
        ):
            with attempt:
                attempts = attempt.retry_state.attempt_number
                horizon = self.horizon(t_max, attempts)
                if attempts > 1:
                    logger.info(
                        "[GridBatcher] cell %d attempt %d with t_max=%.3g",
                        index,
                        attempts,
                        horizon,
                    )
                value = await asyncio.to_thread(cell, horizon)
        return CellOutcome(index=index, value=value, attempts=attempts, t_max=horizon)

    async def _run_cell(
        self, semaphore: asyncio.Semaphore, index: int, cell: Cell, t_max: float
    ) -> CellOutcome:
        async with semaphore:
            GRID_CELLS_IN_FLIGHT.inc()
            start = time.time()
            try:
                return await self._run_with_retries(index, cell, t_max)
            except WeylNonConvergence as exc:
                outcome = CellOutcome(
                    index=index,
                    status="nonconverged",
                    attempts=self.retry_attempts,
                    t_max=self.horizon(t_max, self.retry_attempts),
                    message=str(exc),
                    last_disc=exc.disc,
                    t_reached=exc.t,
                )
            except WeylAtInfinity as exc:
                outcome = CellOutcome(
                    index=index, status="at_infinity", t_max=t_max, message=str(exc)
                )
            except WeylIndeterminate as exc:
                outcome = CellOutcome(
                    index=index, status="indeterminate", t_max=t_max, message=str(exc)
                )
            except NumericFailure as exc:
                outcome = CellOutcome(
                    index=index, status="failed", t_max=t_max, message=str(exc)
                )
            except Exception as exc:
                # one bad cell must not drop the cells already finished
                outcome = CellOutcome(
                    index=index,
                    status="failed",
                    t_max=t_max,
                    message=f"{type(exc).__name__}: {exc}",
                )
            finally:
                GRID_CELL_LATENCY.observe(time.time() - start)
                GRID_CELLS_IN_FLIGHT.dec()
            GRID_CELL_FAILURES.labels(status=outcome.status).inc()
            logger.warning(
                "[GridBatcher] cell %d ended %s: %s",
                index,
                outcome.status,
                outcome.message,
            )
            return outcome

    async def run(self, cells: Sequence[Cell], t_max: Optional[float] = None) -> List[CellOutcome]:
        t_max = t_max or settings.t_max
        semaphore = asyncio.Semaphore(self.max_concurrency)
        logger.debug("[GridBatcher] dispatching %d cells", len(cells))
        return list(
            await asyncio.gather(
                *(
                    self._run_cell(semaphore, index, cell, t_max)
                    for index, cell in enumerate(cells)
                )
            )
        )

    def run_sync(self, cells: Sequence[Cell], t_max: Optional[float] = None) -> List[CellOutcome]:
        return asyncio.run(self.run(cells, t_max))
