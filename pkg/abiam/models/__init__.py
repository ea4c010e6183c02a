from .runs import BatchRun, ReplicationRun


__all__ = ["BatchRun", "ReplicationRun"]
