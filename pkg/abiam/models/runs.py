from datetime import datetime, timezone
from typing import List

from sqlalchemy import DateTime, Float, ForeignKey, Integer, String
from sqlalchemy.orm import Mapped, mapped_column, relationship

from abiam.database import Base


def _now() -> datetime:
    return datetime.now(timezone.utc)


class BatchRun(Base):
    __tablename__ = "batch_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    preset: Mapped[str] = mapped_column(String(64), index=True)
    config_digest: Mapped[str] = mapped_column(String(16))
    seed: Mapped[int] = mapped_column(Integer)
    replications: Mapped[int] = mapped_column(Integer)
    horizon: Mapped[int] = mapped_column(Integer)
    output_dir: Mapped[str] = mapped_column(String(512))
    created_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), default=_now)

    replication_runs: Mapped[List["ReplicationRun"]] = relationship(
        "ReplicationRun", back_populates="batch", cascade="all, delete-orphan", order_by="ReplicationRun.seed"
    )


class ReplicationRun(Base):
    __tablename__ = "replication_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    batch_id: Mapped[int] = mapped_column(Integer, ForeignKey("batch_runs.id"), index=True)
    seed: Mapped[int] = mapped_column(Integer)
    final_gdp: Mapped[float] = mapped_column(Float, default=0.0)
    final_temperature: Mapped[float] = mapped_column(Float, default=0.0)
    bank_failures: Mapped[int] = mapped_column(Integer, default=0)
    series_path: Mapped[str | None] = mapped_column(String(512), nullable=True)

    batch: Mapped["BatchRun"] = relationship("BatchRun", back_populates="replication_runs")
