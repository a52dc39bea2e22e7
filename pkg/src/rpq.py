import itertools
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Optional, Set, Tuple, Union

import networkx as nx

from src.bags import BagDatabase, TupleId
from src.costs import INF, Cost, format_cost
from src.datalog import GOAL, TRUE, DatalogAtom, MDLogProgram
from src.errors import QuerySyntaxError, SignatureError
from src.hitting import HittingSetInstance, selection_ids, solve_hitting_set
from src.queries import Signature

logger = logging.getLogger(__name__)

Letter = Tuple[str, bool]
Element = str

EPSILON_KEYWORD = "eps"
EMPTY_KEYWORD = "empty"
INVERSE_MARK = "^-"


@dataclass(frozen=True)
class Symbol:
    name: str
    inverse: bool = False

    def __str__(self) -> str:
        return self.name + (INVERSE_MARK if self.inverse else "")


@dataclass(frozen=True)
class Epsilon:
    def __str__(self) -> str:
        return EPSILON_KEYWORD


@dataclass(frozen=True)
class Empty:
    def __str__(self) -> str:
        return EMPTY_KEYWORD


@dataclass(frozen=True)
class Alternation:
    left: "Rpq"
    right: "Rpq"

    def __str__(self) -> str:
        return f"({self.left}+{self.right})"


@dataclass(frozen=True)
class Concat:
    left: "Rpq"
    right: "Rpq"

    def __str__(self) -> str:
        return f"({self.left};{self.right})"


@dataclass(frozen=True)
class Star:
    inner: "Rpq"

    def __str__(self) -> str:
        return f"({self.inner})*"


Rpq = Union[Symbol, Epsilon, Empty, Alternation, Concat, Star]

TOKEN_RE = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(\^-)|([()+;*]))")


def _tokenize(text: str) -> List[Tuple[str, int]]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = TOKEN_RE.match(text, position)
        if match is None or match.end() == position:
            offset = position + len(text[position:]) - len(text[position:].lstrip())
            raise QuerySyntaxError(f"Unexpected character {text[offset]!r}", offset)
        start = match.start(match.lastindex) if match.lastindex else position
        tokens.append((match.group(match.lastindex), start))
        position = match.end()
    return tokens


class _RpqParser:
    def __init__(self, text: str, signature: Optional[Signature]):
        self.tokens = _tokenize(text)
        self.end = len(text)
        self.index = 0
        self.signature = signature

    def peek(self) -> Optional[str]:
        return self.tokens[self.index][0] if self.index < len(self.tokens) else None

    def position(self) -> int:
        return self.tokens[self.index][1] if self.index < len(self.tokens) else self.end

    def take(self) -> str:
        token = self.tokens[self.index][0]
        self.index += 1
        return token

    def parse(self) -> Rpq:
        if not self.tokens:
            raise QuerySyntaxError("Empty path query", 0)
        result = self.alternation()
        if self.peek() is not None:
            raise QuerySyntaxError(f"Unexpected token {self.peek()!r}", self.position())
        return result

    def alternation(self) -> Rpq:
        result = self.concatenation()
        while self.peek() == "+":
            self.take()
            result = Alternation(result, self.concatenation())
        return result

    def concatenation(self) -> Rpq:
        result = self.starred()
        while self.peek() == ";":
            self.take()
            result = Concat(result, self.starred())
        return result

    def starred(self) -> Rpq:
        result = self.primary()
        while self.peek() == "*":
            self.take()
            result = Star(result)
        return result

    def primary(self) -> Rpq:
        token, position = self.peek(), self.position()
        if token is None:
            raise QuerySyntaxError("Unexpected end of path query", position)
        if token == "(":
            self.take()
            result = self.alternation()
            if self.peek() != ")":
                raise QuerySyntaxError("Expected ')'", self.position())
            self.take()
            return result
        if token in ("+", ";", "*", ")", INVERSE_MARK):
            raise QuerySyntaxError(f"Unexpected token {token!r}", position)
        self.take()
        if token == EPSILON_KEYWORD:
            return Epsilon()
        if token == EMPTY_KEYWORD:
            return Empty()
        self.check_symbol(token)
        if self.peek() == INVERSE_MARK:
            self.take()
            return Symbol(token, inverse=True)
        return Symbol(token)

    def check_symbol(self, name: str) -> None:
        if self.signature is None:
            return
        if name not in self.signature:
            raise SignatureError(f"Unknown relation {name}")
        if self.signature.arity(name) != 2:
            raise SignatureError(f"Path queries use binary relations, {name} has arity {self.signature.arity(name)}")


def parse_rpq(text: str, signature: Optional[Signature] = None) -> Rpq:
    """Precedence: star binds tightest, then ';', then '+'. R^- is the inverse of R."""
    return _RpqParser(text, signature).parse()


def symbols(q: Rpq) -> Set[str]:
    if isinstance(q, Symbol):
        return {q.name}
    if isinstance(q, (Alternation, Concat)):
        return symbols(q.left) | symbols(q.right)
    if isinstance(q, Star):
        return symbols(q.inner)
    return set()


@dataclass
class Nfa:
    states: int
    initial: FrozenSet[int]
    final: FrozenSet[int]
    transitions: List[Tuple[int, Letter, int]] = field(default_factory=list)


class _Thompson:
    def __init__(self) -> None:
        self.states = 0
        self.moves: List[Tuple[int, Optional[Letter], int]] = []

    def state(self) -> int:
        self.states += 1
        return self.states - 1

    def build(self, q: Rpq) -> Tuple[int, int]:
        start, end = self.state(), self.state()
        if isinstance(q, Symbol):
            self.moves.append((start, (q.name, q.inverse), end))
        elif isinstance(q, Epsilon):
            self.moves.append((start, None, end))
        elif isinstance(q, Alternation):
            for part in (q.left, q.right):
                s, e = self.build(part)
                self.moves += [(start, None, s), (e, None, end)]
        elif isinstance(q, Concat):
            s1, e1 = self.build(q.left)
            s2, e2 = self.build(q.right)
            self.moves += [(start, None, s1), (e1, None, s2), (e2, None, end)]
        elif isinstance(q, Star):
            s, e = self.build(q.inner)
            self.moves += [(start, None, end), (start, None, s), (e, None, s), (e, None, end)]
        return start, end


def build_nfa(q: Rpq) -> Nfa:
    """Thompson construction followed by epsilon elimination."""
    thompson = _Thompson()
    start, end = thompson.build(q)
    closure_graph = nx.DiGraph()
    closure_graph.add_nodes_from(range(thompson.states))
    closure_graph.add_edges_from((p, r) for p, letter, r in thompson.moves if letter is None)
    closure = {p: nx.descendants(closure_graph, p) | {p} for p in range(thompson.states)}
    transitions = sorted(
        {
            (p, letter, r)
            for p in range(thompson.states)
            for q_state in closure[p]
            for source, letter, r in thompson.moves
            if source == q_state and letter is not None
        }
    )
    final = frozenset(p for p in range(thompson.states) if end in closure[p])
    return Nfa(thompson.states, frozenset([start]), final, transitions)


def _check_database(db: BagDatabase, q: Rpq) -> None:
    for name in symbols(q):
        if name in db.signature and db.signature.arity(name) != 2:
            raise SignatureError(f"Path queries use binary relations, {name} has arity {db.signature.arity(name)}")


def product_graph(db: BagDatabase, nfa: Nfa) -> nx.DiGraph:
    """Nodes are (element, state); each edge keeps the cheapest database tuple that realizes it."""
    graph = nx.DiGraph()
    graph.add_nodes_from(itertools.product(db.domain, range(nfa.states)))
    by_letter: Dict[Letter, List[Tuple[int, int]]] = {}
    for p, letter, r in nfa.transitions:
        by_letter.setdefault(letter, []).append((p, r))
    for name, fact in db.tuple_ids():
        if len(fact) != 2:
            continue
        a, b = fact
        weight = 0 if db.is_exogenous((name, fact)) else 1
        for inverse, (source, target) in ((False, (a, b)), (True, (b, a))):
            for p, r in by_letter.get((name, inverse), []):
                u, v = (source, p), (target, r)
                if not graph.has_edge(u, v) or graph[u][v]["weight"] > weight:
                    graph.add_edge(u, v, weight=weight, tuple_id=(name, fact))
    return graph


def evaluate_rpq(db: BagDatabase, q: Rpq) -> Set[Tuple[Element, Element]]:
    _check_database(db, q)
    nfa = build_nfa(q)
    graph = product_graph(db, nfa)
    answers = set()
    for a in db.domain:
        reached: Set[Tuple[Element, int]] = set()
        for i in nfa.initial:
            reached |= nx.descendants(graph, (a, i)) | {(a, i)}
        answers |= {(a, b) for b, state in reached if state in nfa.final}
    return answers


SOURCE = "__source__"
TARGET = "__target__"


def witness_path(db: BagDatabase, q: Rpq) -> Optional[List[TupleId]]:
    """Tuples of an answer path with the fewest endogenous tuples, or None if there is no answer."""
    _check_database(db, q)
    nfa = build_nfa(q)
    graph = product_graph(db, nfa)
    for a in db.domain:
        for i in nfa.initial:
            graph.add_edge(SOURCE, (a, i), weight=0)
        for f in nfa.final:
            graph.add_edge((a, f), TARGET, weight=0)
    if SOURCE not in graph or TARGET not in graph or not nx.has_path(graph, SOURCE, TARGET):
        return None
    path = nx.dijkstra_path(graph, SOURCE, TARGET, weight="weight")
    tuples = [graph[u][v]["tuple_id"] for u, v in zip(path[1:-2], path[2:-1])]
    return list(dict.fromkeys(tuples))


def rpq_to_mdlog(q: Rpq) -> MDLogProgram:
    """Start and end predicates per subexpression; goal fires once the whole query has been traversed."""
    program = MDLogProgram(extensional=symbols(q))
    counter = itertools.count()

    def start(k: int) -> str:
        return f"S{k}"

    def end(k: int) -> str:
        return f"E{k}"

    def unary(predicate: str, var: str = "x") -> DatalogAtom:
        return DatalogAtom(predicate, (var,))

    def translate(nu: Rpq) -> int:
        k = next(counter)
        if isinstance(nu, Symbol):
            if nu.inverse:
                program.add(unary(end(k), "x"), unary(start(k), "y"), DatalogAtom(nu.name, ("x", "y")))
            else:
                program.add(unary(end(k), "y"), unary(start(k), "x"), DatalogAtom(nu.name, ("x", "y")))
        elif isinstance(nu, Epsilon):
            program.add(unary(end(k)), unary(start(k)))
        elif isinstance(nu, Concat):
            first, second = translate(nu.left), translate(nu.right)
            program.add(unary(start(first)), unary(start(k)))
            program.add(unary(start(second)), unary(end(first)))
            program.add(unary(end(k)), unary(end(second)))
        elif isinstance(nu, Alternation):
            for part in (translate(nu.left), translate(nu.right)):
                program.add(unary(start(part)), unary(start(k)))
                program.add(unary(end(k)), unary(end(part)))
        elif isinstance(nu, Star):
            inner = translate(nu.inner)
            program.add(unary(end(k)), unary(start(k)))
            program.add(unary(start(inner)), unary(start(k)))
            program.add(unary(start(k)), unary(end(inner)))
        return k

    root = translate(q)
    program.add(unary(start(root)), unary(TRUE))
    program.add(DatalogAtom(GOAL), unary(end(root)))
    return program


@dataclass
class RpqResilience:
    value: Cost
    removed: List[Tuple[TupleId, int]] = field(default_factory=list)
    rounds: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "resilience": format_cost(self.value),
            "removed": [{"rel": name, "tuple": list(fact), "mult": mult} for (name, fact), mult in self.removed],
            "rounds": self.rounds,
        }


def rpq_resilience(db: BagDatabase, q: Rpq) -> RpqResilience:
    """
    Lazy hitting set: solve over the witness paths found so far, delete the optimum, and look for a
    path that survives. A surviving path is a new hyperedge; none left means the optimum is exact.
    """
    vertices = tuple(db.endogenous_ids())
    instance = HittingSetInstance(vertices, tuple(db.multiplicity(v) for v in vertices))
    index = {v: i for i, v in enumerate(vertices)}
    rounds = 0
    while True:
        rounds += 1
        result = solve_hitting_set(instance)
        if result.value == INF:
            logger.info("Path query resilience is infinite after %d rounds", rounds)
            return RpqResilience(INF, [], rounds)
        removal = selection_ids(instance, result)
        path = witness_path(db.without(removal), q)
        if path is None:
            logger.info("Path query resilience %s after %d rounds", format_cost(result.value), rounds)
            removed = [(t, db.multiplicity(t)) for t in sorted(removal)]
            return RpqResilience(Fraction(result.value), removed, rounds)
        edge = frozenset(index[t] for t in path if not db.is_exogenous(t))
        logger.debug("Round %d: optimum %s, new hyperedge of size %d", rounds, result.value, len(edge))
        instance.add_edge(edge)
