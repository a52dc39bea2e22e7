from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Set, Tuple

import networkx as nx

from src.bags import BagDatabase

TRUE = "true"
GOAL = "goal"


@dataclass(frozen=True)
class DatalogAtom:
    predicate: str
    args: Tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(self.args)})"


@dataclass(frozen=True)
class Rule:
    head: DatalogAtom
    body: Tuple[DatalogAtom, ...]

    def __str__(self) -> str:
        return " ∧ ".join(str(a) for a in self.body) + " → " + str(self.head)


@dataclass
class MDLogProgram:
    """Boolean monadic Datalog: unary intensional predicates plus the nullary goal."""

    rules: List[Rule] = field(default_factory=list)
    extensional: Set[str] = field(default_factory=set)

    def add(self, head: DatalogAtom, *body: DatalogAtom) -> None:
        self.rules.append(Rule(head, tuple(body)))

    def intensional(self) -> Set[str]:
        return {rule.head.predicate for rule in self.rules}

    def is_simple(self) -> bool:
        for rule in self.rules:
            database_atoms = [a for a in rule.body if a.predicate in self.extensional]
            if len(database_atoms) > 1:
                return False
            if any(len(set(a.args)) != len(a.args) for a in database_atoms):
                return False
            graph = nx.Graph()
            for atom in rule.body:
                graph.add_nodes_from(atom.args)
                graph.add_edges_from(zip(atom.args, atom.args[1:]))
            if graph.number_of_nodes() > 0 and not nx.is_connected(graph):
                return False
        return True

    def __str__(self) -> str:
        return "\n".join(str(rule) for rule in self.rules)


def _bindings(
    body: Tuple[DatalogAtom, ...], facts: Dict[str, Set[Tuple[str, ...]]], binding: Dict[str, str]
) -> Iterator[Dict[str, str]]:
    if not body:
        yield binding
        return
    atom, rest = body[0], body[1:]
    for fact in facts.get(atom.predicate, ()):
        extended = dict(binding)
        if all(extended.setdefault(var, value) == value for var, value in zip(atom.args, fact)):
            yield from _bindings(rest, facts, extended)


def evaluate_mdlog(program: MDLogProgram, db: BagDatabase) -> Dict[str, Set[Tuple[str, ...]]]:
    """Naive bottom-up fixpoint; returns every derived fact, the database included."""
    facts: Dict[str, Set[Tuple[str, ...]]] = {name: set(table) for name, table in db.relations.items()}
    facts[TRUE] = {(e,) for e in db.domain}
    changed = True
    while changed:
        changed = False
        for rule in program.rules:
            derived = facts.setdefault(rule.head.predicate, set())
            for binding in list(_bindings(rule.body, facts, {})):
                fact = tuple(binding[var] for var in rule.head.args)
                if fact not in derived:
                    derived.add(fact)
                    changed = True
    return facts


def derives_goal(program: MDLogProgram, db: BagDatabase) -> bool:
    return bool(evaluate_mdlog(program, db).get(GOAL))
