"""Run registry: batches and their replications in a SQL database."""

from pathlib import Path
from typing import Sequence

from loguru import logger
from sqlalchemy import select
from sqlalchemy.orm import selectinload

from abiam.database import get_db
from abiam.kernel.scenario import config_digest
from abiam.models.runs import BatchRun as BatchRunModel
from abiam.models.runs import ReplicationRun as ReplicationRunModel
from abiam.schemas import RunRequest, RunResult, ScenarioConfig


def _final(result: RunResult, column: str) -> float:
    values = result.series.get(column, [])
    return float(values[-1]) if values else 0.0


def register_batch(
    database_url: str,
    config: ScenarioConfig,
    request: RunRequest,
    results: Sequence[RunResult],
) -> int:
    """Store one batch row and one row per replication; returns the batch id."""
    out_dir = Path(request.output_dir)
    with get_db(database_url) as db:
        batch = BatchRunModel(
            preset=config.preset,
            config_digest=config_digest(config),
            seed=request.seed,
            replications=len(results),
            horizon=config.horizon,
            output_dir=str(out_dir),
        )
        for result in results:
            path = out_dir / f"{config.preset}-seed{result.seed}.csv"
            batch.replication_runs.append(
                ReplicationRunModel(
                    seed=result.seed,
                    final_gdp=_final(result, "gdp"),
                    final_temperature=_final(result, "temperature"),
                    bank_failures=int(sum(result.series.get("bank_failures", []))),
                    series_path=str(path) if "series-csv" in request.emit else None,
                )
            )
        db.add(batch)
        db.flush()
        batch_id = batch.id
    logger.info(f"Registered batch {batch_id} ({config.preset}, {len(results)} replication(s))")
    return batch_id


def list_batches(database_url: str, limit: int = 20) -> list[BatchRunModel]:
    """Newest batches first, replications loaded."""
    with get_db(database_url) as db:
        stmt = (
            select(BatchRunModel)
            .options(selectinload(BatchRunModel.replication_runs))
            .order_by(BatchRunModel.created_at.desc(), BatchRunModel.id.desc())
            .limit(limit)
        )
        return list(db.scalars(stmt).all())
