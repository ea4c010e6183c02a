from contextlib import contextmanager
from typing import Iterator

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker


class Base(DeclarativeBase):
    pass


_engines: dict[str, Engine] = {}


def get_engine(url: str) -> Engine:
    """One engine per URL; tables are created on first use."""
    if url not in _engines:
        engine = create_engine(url, echo=False)
        # models register themselves on Base.metadata when imported
        import abiam.models  # noqa: F401

        Base.metadata.create_all(engine)
        _engines[url] = engine
    return _engines[url]


@contextmanager
def get_db(url: str) -> Iterator[Session]:
    session_factory = sessionmaker(bind=get_engine(url), expire_on_commit=False)
    db: Session = session_factory()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()
