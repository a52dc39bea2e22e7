import re
import json
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, FrozenSet, Iterator, Sequence, Union

import networkx as nx  # type: ignore

from src.errors import InputFormatError, QuerySyntaxError, SignatureError

Element = str
Fact = Tuple[Element, ...]


@dataclass(frozen=True)
class Signature:
    arities: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, arity in self.arities.items():
            if arity < 1:
                raise SignatureError(f"Relation {name} must have positive arity, got {arity}")

    def arity(self, name: str) -> int:
        if name not in self.arities:
            raise SignatureError(f"Unknown relation {name}")
        return self.arities[name]

    def names(self) -> List[str]:
        return sorted(self.arities)

    def with_relation(self, name: str, arity: int) -> "Signature":
        if name in self.arities and self.arities[name] != arity:
            raise SignatureError(f"Relation {name} declared with arity {self.arities[name]} and {arity}")
        arities = dict(self.arities)
        arities[name] = arity
        return Signature(arities)

    def merge(self, other: "Signature") -> "Signature":
        result = self
        for name, arity in other.arities.items():
            result = result.with_relation(name, arity)
        return result

    def __contains__(self, name: object) -> bool:
        return name in self.arities


@dataclass(frozen=True)
class QueryAtom:
    relation: str
    args: Tuple[int, ...]


@dataclass(frozen=True)
class ConjunctiveQuery:
    signature: Signature
    variables: Tuple[str, ...]
    atoms: Tuple[QueryAtom, ...]

    def __post_init__(self) -> None:
        used = set()
        for atom in self.atoms:
            arity = self.signature.arity(atom.relation)
            if arity != len(atom.args):
                raise SignatureError(
                    f"Atom {atom.relation} has {len(atom.args)} arguments, relation arity is {arity}"
                )
            for index in atom.args:
                assert 0 <= index < len(self.variables)
                used.add(index)
        unused = [self.variables[i] for i in range(len(self.variables)) if i not in used]
        if unused:
            raise SignatureError(f"Variables {unused} occur in no atom")

    def __str__(self) -> str:
        body = ", ".join(f"{a.relation}({','.join(self.variables[i] for i in a.args)})" for a in self.atoms)
        return f"q() :- {body}."


@dataclass(frozen=True)
class UnionQuery:
    signature: Signature
    disjuncts: Tuple[ConjunctiveQuery, ...]
    exogenous: FrozenSet[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.disjuncts:
            raise SignatureError("A union query needs at least one disjunct")
        for cq in self.disjuncts:
            if cq.signature != self.signature:
                raise SignatureError("All disjuncts must share one signature")
        for name in self.exogenous:
            self.signature.arity(name)

    def __str__(self) -> str:
        return "\n".join(str(cq) for cq in self.disjuncts)

    def max_variables(self) -> int:
        return max(len(cq.variables) for cq in self.disjuncts)


@dataclass(frozen=True)
class RelationalStructure:
    domain: Tuple[Element, ...]
    relations: Dict[str, FrozenSet[Fact]]
    signature: Signature

    def __post_init__(self) -> None:
        elements = set(self.domain)
        assert len(elements) == len(self.domain), "duplicate elements"
        for name, facts in self.relations.items():
            arity = self.signature.arity(name)
            for fact in facts:
                if len(fact) != arity:
                    raise SignatureError(f"Tuple {fact} does not match arity {arity} of {name}")
                for element in fact:
                    if element not in elements:
                        raise SignatureError(f"Tuple {fact} of {name} leaves the domain")

    def facts(self, name: str) -> FrozenSet[Fact]:
        return self.relations.get(name, frozenset())

    def holds(self, name: str, fact: Sequence[Element]) -> bool:
        return tuple(fact) in self.relations.get(name, frozenset())

    def induced(self, elements: Sequence[Element]) -> "RelationalStructure":
        keep = set(elements)
        relations = {
            name: frozenset(t for t in facts if all(e in keep for e in t)) for name, facts in self.relations.items()
        }
        return RelationalStructure(tuple(e for e in self.domain if e in keep), relations, self.signature)

    def size(self) -> int:
        return len(self.domain)


@dataclass(frozen=True)
class StructureReport:
    connected: bool
    incidence_acyclic: bool
    gaifman_complete: bool


def make_structure(
    domain: Sequence[Element],
    relations: Dict[str, Sequence[Sequence[Element]]],
    signature: Optional[Signature] = None,
) -> RelationalStructure:
    if signature is None:
        arities: Dict[str, int] = {}
        for name, facts in relations.items():
            for fact in facts:
                arities[name] = len(fact)
                break
        signature = Signature(arities)
    frozen = {name: frozenset(tuple(t) for t in facts) for name, facts in relations.items()}
    for name in signature.names():
        frozen.setdefault(name, frozenset())
    return RelationalStructure(tuple(domain), frozen, signature)


TOKEN_RE = re.compile(r"\s*(?:(%[^\n]*)|(#relation|#exogenous)|(:-)|([A-Za-z_][A-Za-z0-9_']*)|(\d+)|([(),./]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens: List[Tuple[str, str, int]] = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = TOKEN_RE.match(text, position)
        if not match or match.end() == position:
            start = position + len(text[position:]) - len(text[position:].lstrip())
            raise QuerySyntaxError(f"Unexpected character {text[start]!r}", start)
        comment, directive, arrow, ident, number, punct = match.groups()
        start = match.start(match.lastindex) if match.lastindex else position
        if directive:
            tokens.append(("directive", directive, start))
        elif arrow:
            tokens.append(("arrow", arrow, start))
        elif ident:
            tokens.append(("ident", ident, start))
        elif number:
            tokens.append(("number", number, start))
        elif punct:
            tokens.append(("punct", punct, start))
        position = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _QueryParser:
    def __init__(self, text: str, sig: Optional[Signature]):
        self.tokens = _tokenize(text)
        self.index = 0
        self.declared = sig is not None
        self.sig = sig if sig is not None else Signature()
        self.exogenous: List[str] = []
        self.head: Optional[str] = None

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.index]

    def take(self, kind: str, value: Optional[str] = None) -> Tuple[str, str, int]:
        token = self.tokens[self.index]
        if token[0] != kind or (value is not None and token[1] != value):
            expected = value if value is not None else kind
            found = token[1] if token[1] else "end of input"
            raise QuerySyntaxError(f"Expected {expected}, found {found!r}", token[2])
        self.index += 1
        return token

    def parse(self) -> UnionQuery:
        rules: List[Tuple[List[Tuple[str, List[str], int]], int]] = []
        while self.peek()[0] != "end":
            if self.peek()[0] == "directive":
                self.parse_directive()
            else:
                rules.append(self.parse_rule())
        if not rules:
            raise QuerySyntaxError("No rules found", self.tokens[-1][2])
        disjuncts = tuple(self.build(atoms, position) for atoms, position in rules)
        return UnionQuery(self.sig, disjuncts, frozenset(self.exogenous))

    def parse_directive(self) -> None:
        _, directive, _ = self.take("directive")
        _, name, position = self.take("ident")
        if directive == "#relation":
            self.take("punct", "/")
            _, arity, arity_position = self.take("number")
            if int(arity) < 1:
                raise QuerySyntaxError("Arity must be positive", arity_position)
            self.sig = self.sig.with_relation(name, int(arity))
            self.declared = True
        else:
            self.exogenous.append(name)

    def parse_rule(self) -> Tuple[List[Tuple[str, List[str], int]], int]:
        _, head, position = self.take("ident")
        if self.head is None:
            self.head = head
        elif head != self.head:
            raise QuerySyntaxError(f"Rule head {head} differs from {self.head}", position)
        self.take("punct", "(")
        self.take("punct", ")")
        self.take("arrow")
        atoms = [self.parse_atom()]
        while self.peek()[1] == ",":
            self.take("punct", ",")
            atoms.append(self.parse_atom())
        self.take("punct", ".")
        return atoms, position

    def parse_atom(self) -> Tuple[str, List[str], int]:
        _, name, position = self.take("ident")
        self.take("punct", "(")
        args = [self.take("ident")[1]]
        while self.peek()[1] == ",":
            self.take("punct", ",")
            args.append(self.take("ident")[1])
        self.take("punct", ")")
        return name, args, position

    def build(self, atoms: List[Tuple[str, List[str], int]], position: int) -> ConjunctiveQuery:
        variables: List[str] = []
        built: List[QueryAtom] = []
        for name, args, atom_position in atoms:
            if name not in self.sig:
                if self.declared:
                    raise SignatureError(f"Unknown relation {name} at position {atom_position}")
                self.sig = self.sig.with_relation(name, len(args))
            if self.sig.arity(name) != len(args):
                raise SignatureError(
                    f"Arity mismatch for {name} at position {atom_position}: "
                    f"expected {self.sig.arity(name)}, got {len(args)}"
                )
            for var in args:
                if var not in variables:
                    variables.append(var)
            built.append(QueryAtom(name, tuple(variables.index(v) for v in args)))
        return ConjunctiveQuery(Signature(dict(self.sig.arities)), tuple(variables), tuple(built))


def parse_union_query(text: str, sig: Optional[Signature] = None) -> UnionQuery:
    parser = _QueryParser(text, sig)
    union = parser.parse()
    # relations declared after some rules were parsed must be visible to every disjunct
    disjuncts = tuple(ConjunctiveQuery(parser.sig, cq.variables, cq.atoms) for cq in union.disjuncts)
    return UnionQuery(parser.sig, disjuncts, union.exogenous)


def canonical_database(cq: ConjunctiveQuery) -> RelationalStructure:
    relations: Dict[str, set] = {name: set() for name in cq.signature.names()}
    for atom in cq.atoms:
        relations[atom.relation].add(tuple(cq.variables[i] for i in atom.args))
    return RelationalStructure(
        cq.variables, {name: frozenset(facts) for name, facts in relations.items()}, cq.signature
    )


def canonical_query(structure: RelationalStructure) -> ConjunctiveQuery:
    used = [e for e in structure.domain if any(e in t for facts in structure.relations.values() for t in facts)]
    atoms = []
    for name in sorted(structure.relations):
        for fact in sorted(structure.relations[name]):
            atoms.append(QueryAtom(name, tuple(used.index(e) for e in fact)))
    return ConjunctiveQuery(structure.signature, tuple(used), tuple(atoms))


def gaifman_graph(cq: ConjunctiveQuery) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(cq.variables)
    for atom in cq.atoms:
        names = [cq.variables[i] for i in atom.args]
        for a, b in itertools.combinations(sorted(set(names)), 2):
            graph.add_edge(a, b)
    return graph


def incidence_multigraph(cq: ConjunctiveQuery) -> nx.MultiGraph:
    graph = nx.MultiGraph()
    graph.add_nodes_from(("var", v) for v in cq.variables)
    for number, atom in enumerate(cq.atoms):
        graph.add_node(("atom", number))
        for index in atom.args:
            graph.add_edge(("atom", number), ("var", cq.variables[index]))
    return graph


def analyze(cq: ConjunctiveQuery) -> StructureReport:
    gaifman = gaifman_graph(cq)
    connected = len(cq.variables) > 0 and nx.number_connected_components(gaifman) == 1
    incidence = incidence_multigraph(cq)
    # a multigraph is a forest iff it has exactly |V| - #components edges
    forest_edges = incidence.number_of_nodes() - nx.number_connected_components(incidence)
    acyclic = incidence.number_of_edges() == forest_edges
    n = len(cq.variables)
    complete = gaifman.number_of_edges() == n * (n - 1) // 2
    return StructureReport(connected=connected, incidence_acyclic=acyclic, gaifman_complete=complete)


def components(cq: ConjunctiveQuery) -> List[ConjunctiveQuery]:
    gaifman = gaifman_graph(cq)
    result = []
    parts = sorted(nx.connected_components(gaifman), key=lambda part: min(cq.variables.index(v) for v in part))
    for part in parts:
        variables = tuple(v for v in cq.variables if v in part)
        atoms = []
        for atom in cq.atoms:
            names = [cq.variables[i] for i in atom.args]
            if names[0] in part:
                atoms.append(QueryAtom(atom.relation, tuple(variables.index(v) for v in names)))
        result.append(ConjunctiveQuery(cq.signature, variables, tuple(atoms)))
    return result


def _candidates(
    var: Element,
    src: RelationalStructure,
    dst: RelationalStructure,
    atoms_of: Dict[Element, List[Tuple[str, Fact]]],
    assignment: Dict[Element, Element],
) -> List[Element]:
    allowed: Optional[set] = None
    for name, fact in atoms_of[var]:
        values = set()
        for target in dst.facts(name):
            ok = True
            chosen = None
            for s, t in zip(fact, target):
                if s == var:
                    if chosen is None:
                        chosen = t
                    elif chosen != t:
                        ok = False
                        break
                elif s in assignment and assignment[s] != t:
                    ok = False
                    break
            if ok:
                values.add(chosen)
        allowed = values if allowed is None else allowed & values
        if not allowed:
            return []
    if allowed is None:
        return list(dst.domain)
    return [e for e in dst.domain if e in allowed]


def enumerate_homomorphisms(
    src: RelationalStructure,
    dst: RelationalStructure,
    limit: Optional[int] = None,
) -> Iterator[Dict[Element, Element]]:
    """Homomorphisms in lexicographic order over the source and target domain orders."""
    for name in src.relations:
        if src.relations[name] and name not in dst.signature:
            return
    atoms_of: Dict[Element, List[Tuple[str, Fact]]] = {e: [] for e in src.domain}
    for name in sorted(src.relations):
        for fact in sorted(src.relations[name]):
            for element in set(fact):
                atoms_of[element].append((name, fact))
    order = list(src.domain)
    assignment: Dict[Element, Element] = {}
    produced = 0

    def search(depth: int) -> Iterator[Dict[Element, Element]]:
        nonlocal produced
        if depth == len(order):
            produced += 1
            yield dict(assignment)
            return
        var = order[depth]
        for value in _candidates(var, src, dst, atoms_of, assignment):
            assignment[var] = value
            yield from search(depth + 1)
            del assignment[var]
            if limit is not None and produced >= limit:
                return

    if limit is not None and limit <= 0:
        return
    yield from search(0)


def has_homomorphism(src: RelationalStructure, dst: RelationalStructure) -> bool:
    return next(enumerate_homomorphisms(src, dst, limit=1), None) is not None


def satisfies(structure: RelationalStructure, query: Union[ConjunctiveQuery, UnionQuery]) -> bool:
    disjuncts = query.disjuncts if isinstance(query, UnionQuery) else (query,)
    return any(has_homomorphism(canonical_database(cq), structure) for cq in disjuncts)


def core_of(s: RelationalStructure) -> RelationalStructure:
    for size in range(1, s.size() + 1):
        for subset in itertools.combinations(s.domain, size):
            sub = s.induced(subset)
            if has_homomorphism(s, sub):
                return sub
    return s


def implies(a: ConjunctiveQuery, b: ConjunctiveQuery) -> bool:
    return has_homomorphism(canonical_database(b), canonical_database(a))


def is_isomorphic(a: RelationalStructure, b: RelationalStructure) -> bool:
    if a.size() != b.size():
        return False
    for name in set(a.relations) | set(b.relations):
        if len(a.facts(name)) != len(b.facts(name)):
            return False
    for mapping in enumerate_homomorphisms(a, b):
        if len(set(mapping.values())) != a.size():
            continue
        image = {name: frozenset(tuple(mapping[e] for e in t) for t in facts) for name, facts in a.relations.items()}
        if all(image.get(name, frozenset()) == b.facts(name) for name in set(a.relations) | set(b.relations)):
            return True
    return False


def relational_structure_from_dict(content: Dict[str, object]) -> RelationalStructure:
    """Reads {"domain": [...], "relations": {name: [[e, ...], ...]}, "signature": {name: arity}}."""
    if "domain" not in content or "relations" not in content:
        raise InputFormatError("Relational structure needs 'domain' and 'relations'")
    domain = [str(e) for e in content["domain"]]  # type: ignore
    relations = {
        str(name): [tuple(str(e) for e in fact) for fact in facts]
        for name, facts in content["relations"].items()  # type: ignore
    }
    signature = None
    if "signature" in content:
        signature = Signature({str(n): int(a) for n, a in content["signature"].items()})  # type: ignore
    if len(set(domain)) != len(domain):
        raise InputFormatError("Duplicate elements in domain")
    return make_structure(domain, relations, signature)


def relational_structure_to_dict(structure: RelationalStructure) -> Dict[str, object]:
    return {
        "domain": list(structure.domain),
        "signature": dict(structure.signature.arities),
        "relations": {name: [list(t) for t in sorted(structure.facts(name))] for name in structure.signature.names()},
    }


def load_relational_structure(path: str) -> RelationalStructure:
    with open(path, "r") as r:
        return relational_structure_from_dict(json.load(r))
