import json
from typing import Optional, List, Any, Dict
from datetime import datetime, timezone

from sqlalchemy import create_engine, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase, sessionmaker, mapped_column, Mapped


class Base(DeclarativeBase):
    pass


class Run(Base):
    __tablename__ = "runs"
    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    command: Mapped[str] = mapped_column(String, nullable=False, index=True)
    subject: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    route: Mapped[Optional[str]]
    value: Mapped[Optional[str]]
    result: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    params: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    timestamp: Mapped[int]


class Database:
    def __init__(self, db_path: str):
        self.engine = create_engine(f"sqlite:///{db_path}")
        Base.metadata.create_all(self.engine)
        self.Session = sessionmaker(bind=self.engine)

    @staticmethod
    def get_current_ts() -> int:
        return int(datetime.now().replace(tzinfo=timezone.utc).timestamp())

    def save_run(
        self,
        command: str,
        subject: Optional[str] = None,
        route: Optional[str] = None,
        value: Optional[str] = None,
        result: Any = None,
        params: Optional[Dict[str, Any]] = None,
    ) -> int:
        with self.Session() as session:
            run = Run(
                command=command,
                subject=subject,
                route=route,
                value=value,
                result=self._serialize(result),
                params=self._serialize(params),
                timestamp=self.get_current_ts(),
            )
            session.add(run)
            session.commit()
            return run.id

    def get_runs(self, command: Optional[str] = None) -> List[Dict[str, Any]]:
        with self.Session() as session:
            query = session.query(Run)
            if command is not None:
                query = query.filter(Run.command == command)
            return [self._to_dict(run) for run in query.order_by(Run.id).all()]

    def get_run(self, run_id: int) -> Optional[Dict[str, Any]]:
        with self.Session() as session:
            run = session.query(Run).filter(Run.id == run_id).first()
            return self._to_dict(run) if run else None

    def _to_dict(self, run: Run) -> Dict[str, Any]:
        return {
            "id": run.id,
            "command": run.command,
            "subject": run.subject,
            "route": run.route,
            "value": run.value,
            "result": self._parse(run.result),
            "params": self._parse(run.params),
            "timestamp": run.timestamp,
        }

    def _serialize(self, content: Any) -> Optional[str]:
        if content is None:
            return None
        return json.dumps(content, ensure_ascii=False, default=str)

    def _parse(self, content: Optional[str]) -> Any:
        if content is None:
            return None
        try:
            return json.loads(content)
        except json.JSONDecodeError:
            return content
