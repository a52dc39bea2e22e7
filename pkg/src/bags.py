import csv
import json
import os
import random
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from src.errors import InputFormatError, SignatureError
from src.queries import RelationalStructure, Signature
from src.valued import Atom, TauExpression

Fact = Tuple[str, ...]
TupleId = Tuple[str, Fact]

MULTIPLICITY_COLUMN = "mult"
EXOGENOUS_COLUMN = "exo"
EXOGENOUS_FILE = "exogenous.txt"


@dataclass(frozen=True)
class BagDatabase:
    signature: Signature
    domain: Tuple[str, ...]
    relations: Dict[str, Dict[Fact, int]] = field(default_factory=dict)
    exogenous: FrozenSet[str] = frozenset()
    exogenous_tuples: FrozenSet[TupleId] = frozenset()

    def __post_init__(self) -> None:
        elements = set(self.domain)
        for name, table in self.relations.items():
            arity = self.signature.arity(name)
            for fact, count in table.items():
                if len(fact) != arity:
                    raise SignatureError(f"Tuple {fact} of {name} does not match arity {arity}")
                if count < 1:
                    raise InputFormatError(f"Multiplicity of {name}{fact} must be positive, got {count}")
                if any(e not in elements for e in fact):
                    raise InputFormatError(f"Tuple {fact} of {name} leaves the domain")
        for name in self.exogenous:
            self.signature.arity(name)
        for name, fact in self.exogenous_tuples:
            if fact not in self.relations.get(name, {}):
                raise InputFormatError(f"Exogenous tuple {name}{fact} is not in the database")

    def tuple_ids(self) -> List[TupleId]:
        return sorted((name, fact) for name, table in self.relations.items() for fact in table)

    def multiplicity(self, tuple_id: TupleId) -> int:
        name, fact = tuple_id
        return self.relations.get(name, {}).get(fact, 0)

    def is_exogenous(self, tuple_id: TupleId) -> bool:
        return tuple_id[0] in self.exogenous or tuple_id in self.exogenous_tuples

    def endogenous_ids(self) -> List[TupleId]:
        return [t for t in self.tuple_ids() if not self.is_exogenous(t)]

    def total_weight(self) -> int:
        return sum(self.multiplicity(t) for t in self.endogenous_ids())

    def structure(self, signature: Optional[Signature] = None) -> RelationalStructure:
        sig = self.signature if signature is None else self.signature.merge(signature)
        relations = {name: frozenset(self.relations.get(name, {})) for name in sig.names()}
        return RelationalStructure(self.domain, relations, sig)

    def without(self, removed: Iterable[TupleId]) -> "BagDatabase":
        gone = set(removed)
        relations = {
            name: {fact: count for fact, count in table.items() if (name, fact) not in gone}
            for name, table in self.relations.items()
        }
        return BagDatabase(
            self.signature, self.domain, relations, self.exogenous, frozenset(self.exogenous_tuples - gone)
        )

    def with_tuple(self, name: str, fact: Sequence[str], count: int = 1) -> "BagDatabase":
        fact = tuple(fact)
        domain = list(self.domain) + [e for e in dict.fromkeys(fact) if e not in self.domain]
        relations = {n: dict(t) for n, t in self.relations.items()}
        table = relations.setdefault(name, {})
        table[fact] = table.get(fact, 0) + count
        return BagDatabase(self.signature, tuple(domain), relations, self.exogenous, self.exogenous_tuples)

    def with_exogenous(self, names: Iterable[str]) -> "BagDatabase":
        return BagDatabase(
            self.signature, self.domain, self.relations, self.exogenous | frozenset(names), self.exogenous_tuples
        )

    def to_dict(self) -> Dict[str, Any]:
        exogenous_tuples: Dict[str, List[List[str]]] = {}
        for name, fact in sorted(self.exogenous_tuples):
            exogenous_tuples.setdefault(name, []).append(list(fact))
        return {
            "elements": list(self.domain),
            "relations": {
                name: [[list(fact), count] for fact, count in sorted(table.items())]
                for name, table in sorted(self.relations.items())
            },
            "exogenous": sorted(self.exogenous),
            "exogenous_tuples": exogenous_tuples,
        }


class _Builder:
    def __init__(self, signature: Optional[Signature]):
        self.declared = signature is not None
        self.signature = signature if signature is not None else Signature()
        self.domain: List[str] = []
        self.relations: Dict[str, Dict[Fact, int]] = {}
        self.exogenous: List[str] = []
        self.exogenous_tuples: List[TupleId] = []

    def element(self, element: str) -> None:
        if element not in self.domain:
            self.domain.append(element)

    def relation(self, name: str, arity: int) -> None:
        if name not in self.signature:
            if self.declared:
                raise SignatureError(f"Unknown relation {name}")
            self.signature = self.signature.with_relation(name, arity)
        elif self.signature.arity(name) != arity:
            raise SignatureError(f"Arity mismatch for {name}: expected {self.signature.arity(name)}, got {arity}")

    def add(self, name: str, fact: Sequence[Any], count: int) -> None:
        fact = tuple(str(e) for e in fact)
        if not fact:
            raise InputFormatError(f"Empty tuple in {name}")
        self.relation(name, len(fact))
        if count < 1:
            raise InputFormatError(f"Multiplicity of {name}{fact} must be positive, got {count}")
        for e in fact:
            self.element(e)
        table = self.relations.setdefault(name, {})
        table[fact] = table.get(fact, 0) + count

    def build(self) -> BagDatabase:
        for name in self.exogenous:
            if name not in self.signature:
                raise SignatureError(f"Unknown exogenous relation {name}")
        return BagDatabase(
            self.signature,
            tuple(self.domain),
            self.relations,
            frozenset(self.exogenous),
            frozenset(self.exogenous_tuples),
        )


def _parse_count(value: Any, where: str) -> int:
    try:
        count = int(value)
    except (TypeError, ValueError):
        raise InputFormatError(f"Bad multiplicity {value!r} in {where}") from None
    if str(value).strip() != str(count) and not isinstance(value, int):
        raise InputFormatError(f"Bad multiplicity {value!r} in {where}")
    return count


def database_from_dict(content: Dict[str, Any], signature: Optional[Signature] = None) -> BagDatabase:
    builder = _Builder(signature)
    for element in content.get("elements", []):
        builder.element(str(element))
    for name, entries in content.get("relations", {}).items():
        for entry in entries:
            if isinstance(entry, list) and len(entry) == 2 and isinstance(entry[0], list):
                builder.add(name, entry[0], _parse_count(entry[1], name))
            elif isinstance(entry, list) and all(isinstance(e, str) for e in entry):
                builder.add(name, entry, 1)
            else:
                raise InputFormatError(f"Bad entry {entry!r} in {name}")
    builder.exogenous = [str(name) for name in content.get("exogenous", [])]
    for name, facts in content.get("exogenous_tuples", {}).items():
        for fact in facts:
            builder.exogenous_tuples.append((name, tuple(str(e) for e in fact)))
    return builder.build()


def _load_csv_directory(path: str, signature: Optional[Signature]) -> BagDatabase:
    builder = _Builder(signature)
    for file_name in sorted(os.listdir(path)):
        if not file_name.endswith(".csv"):
            continue
        name = file_name[: -len(".csv")]
        with open(os.path.join(path, file_name), "r", newline="") as r:
            reader = csv.reader(r)
            header = next(reader, None)
            if header is None:
                continue
            header = [h.strip() for h in header]
            positions = [i for i, h in enumerate(header) if h not in (MULTIPLICITY_COLUMN, EXOGENOUS_COLUMN)]
            count_column = header.index(MULTIPLICITY_COLUMN) if MULTIPLICITY_COLUMN in header else None
            exo_column = header.index(EXOGENOUS_COLUMN) if EXOGENOUS_COLUMN in header else None
            for line_number, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise SignatureError(f"{file_name}:{line_number} has {len(row)} columns, expected {len(header)}")
                fact = [row[i].strip() for i in positions]
                count = 1 if count_column is None else _parse_count(row[count_column].strip(), file_name)
                builder.add(name, fact, count)
                if exo_column is not None and row[exo_column].strip() in ("1", "true", "yes"):
                    builder.exogenous_tuples.append((name, tuple(fact)))
    exogenous_path = os.path.join(path, EXOGENOUS_FILE)
    if os.path.exists(exogenous_path):
        with open(exogenous_path, "r") as r:
            builder.exogenous = [line.strip() for line in r if line.strip()]
    return builder.build()


def load_bag_database(path: str, format: Optional[str] = None, signature: Optional[Signature] = None) -> BagDatabase:
    if format is None:
        format = "csv" if os.path.isdir(path) else "json"
    if format == "json":
        with open(path, "r") as r:
            return database_from_dict(json.load(r), signature)
    if format == "csv":
        if not os.path.isdir(path):
            raise InputFormatError(f"CSV databases are directories of relation files, got {path}")
        return _load_csv_directory(path, signature)
    raise InputFormatError(f"Unknown database format {format}")


def database_to_expression(db: BagDatabase, tuple_exogeneity_suffix: str = ":exo") -> TauExpression:
    """One summand per tuple copy; exogenous single tuples become one crisp summand."""
    variables = tuple(db.domain)
    summands: List[Atom] = []
    for name, fact in db.tuple_ids():
        args = tuple(variables.index(e) for e in fact)
        if (name, fact) in db.exogenous_tuples and name not in db.exogenous:
            summands.append(Atom(name + tuple_exogeneity_suffix, args))
        else:
            summands.extend([Atom(name, args)] * db.multiplicity((name, fact)))
    return TauExpression(variables, tuple(summands))


def expression_to_database(
    expr: TauExpression, signature: Signature, exogenous: Iterable[str] = (), tuple_exogeneity_suffix: str = ":exo"
) -> BagDatabase:
    builder = _Builder(signature)
    for var in expr.variables:
        builder.element(var)
    for atom in expr.summands:
        fact = tuple(expr.variables[i] for i in atom.args)
        if atom.symbol.endswith(tuple_exogeneity_suffix):
            name = atom.symbol[: -len(tuple_exogeneity_suffix)]
            if fact not in builder.relations.get(name, {}):
                builder.add(name, fact, 1)
            builder.exogenous_tuples.append((name, fact))
        else:
            builder.add(atom.symbol, fact, 1)
    builder.exogenous = list(exogenous)
    builder.exogenous_tuples = sorted(set(builder.exogenous_tuples))
    return builder.build()


def random_bag_database(
    signature: Signature, rng: random.Random, elements: int = 3, total: int = 5, exogenous: Iterable[str] = ()
) -> BagDatabase:
    """Total multiplicity is drawn from 0..total; tuples are sampled with replacement over `elements` points."""
    domain = [f"e{i}" for i in range(elements)]
    builder = _Builder(signature)
    for element in domain:
        builder.element(element)
    names = signature.names()
    for _ in range(rng.randint(0, total)):
        name = rng.choice(names)
        builder.add(name, [rng.choice(domain) for _ in range(signature.arity(name))], 1)
    builder.exogenous = list(exogenous)
    return builder.build()
