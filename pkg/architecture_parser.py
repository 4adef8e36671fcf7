#!/usr/bin/env python3
"""
Architecture Parser - reads and writes the textual .arch description
Block-structured DSL mirroring the rows of the 4+1 summary table:
one `architecture` block holding logical, process, development, physical
and scenario views plus `map l2p` / `map l2d` correspondence blocks
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Set, Tuple, Type, TypeVar, Union

import structlog

from architecture_model import (
    IDENTIFIER,
    ArchitectureModel,
    Autonomy,
    Class,
    ClassCategory,
    Configuration,
    Connector,
    ConnectorKind,
    DevDependency,
    DevelopmentView,
    L2DEntry,
    L2PEntry,
    LayerDef,
    Link,
    LogicalView,
    Medium,
    ModuleRef,
    Node,
    Persistence,
    PhysicalView,
    Placement,
    Process,
    ProcessView,
    Relation,
    RelationKind,
    Scenario,
    ScenarioView,
    Step,
    Subsystem,
    Task,
    TaskKind,
)
from diagnostics import Diagnostic, SourceSpan, make_diagnostic, sort_diagnostics

logger = structlog.get_logger(__name__)

E = TypeVar("E", bound=Enum)

_TOKEN_SPEC = [
    ("COMMENT", r"#[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r\f\v]+"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("NUMBER", r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*"),
    ("ARROW", r"->"),
    ("PUNCT", r"[{}:,.]"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))
_INTEGER_RE = re.compile(r"-?\d+\Z")

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}
_UNESCAPES = {v: f"\\{k}" for k, v in _ESCAPES.items()}


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    span: SourceSpan


@dataclass
class ParseResult:
    """Either a model or the diagnostics explaining why there is none"""

    model: Optional[ArchitectureModel] = None
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None


class _SyntaxAbort(Exception):
    """Unwinds the parser after an unrecoverable syntax error"""


def _unescape(body: str) -> str:
    out = []
    chars = iter(body)
    for ch in chars:
        if ch == "\\":
            nxt = next(chars, "")
            out.append(_ESCAPES.get(nxt, nxt))
        else:
            out.append(ch)
    return "".join(out)


def quote(text: str) -> str:
    return '"' + "".join(_UNESCAPES.get(ch, ch) for ch in text) + '"'


class ArchitectureLexer:
    def __init__(self, text: str, filename: str = "<input>"):
        self.text = text
        self.filename = filename
        self.errors: List[Diagnostic] = []

    def tokens(self) -> Iterator[Token]:
        line, line_start = 1, 0
        for match in _TOKEN_RE.finditer(self.text):
            kind = match.lastgroup
            value = match.group()
            span = SourceSpan(self.filename, line, match.start() - line_start + 1)
            if kind == "NEWLINE":
                line += 1
                line_start = match.end()
            elif kind in ("SKIP", "COMMENT"):
                continue
            elif kind == "MISMATCH":
                message = (
                    "unterminated string literal"
                    if value == '"'
                    else f"unexpected character {value!r}"
                )
                self.errors.append(make_diagnostic("E_PARSE", message, span))
            elif kind == "STRING":
                yield Token(kind, _unescape(value[1:-1]), span)
            else:
                yield Token(kind, value, span)
        yield Token("EOF", "", SourceSpan(self.filename, line, len(self.text) - line_start + 1))


class ArchitectureParser:
    """Recursive-descent parser producing an ArchitectureModel"""

    def __init__(self, text: str, filename: str = "<input>"):
        self.filename = filename
        lexer = ArchitectureLexer(text, filename)
        self.tokens = list(lexer.tokens())
        self.diagnostics: List[Diagnostic] = list(lexer.errors)
        self.pos = 0
        self._declared: Dict[str, Set[Union[str, int]]] = {}

    # token helpers

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != "EOF":
            self.pos += 1
        return token

    def fail(self, message: str, token: Optional[Token] = None) -> "_SyntaxAbort":
        token = token or self.peek()
        self.diagnostics.append(make_diagnostic("E_PARSE", message, token.span))
        return _SyntaxAbort(message)

    def describe(self, token: Token) -> str:
        return "end of input" if token.kind == "EOF" else repr(token.value)

    def at_keyword(self, *words: str) -> bool:
        token = self.peek()
        return token.kind == "IDENT" and token.value in words

    def accept_keyword(self, word: str) -> Optional[Token]:
        if self.at_keyword(word):
            return self.advance()
        return None

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.fail(f"expected '{word}', found {self.describe(self.peek())}")
        return self.advance()

    def at_punct(self, value: str) -> bool:
        token = self.peek()
        return token.kind in ("PUNCT", "ARROW") and token.value == value

    def accept_punct(self, value: str) -> bool:
        if self.at_punct(value):
            self.advance()
            return True
        return False

    def expect_punct(self, value: str) -> Token:
        if not self.at_punct(value):
            raise self.fail(f"expected '{value}', found {self.describe(self.peek())}")
        return self.advance()

    def ident(self, what: str) -> str:
        token = self.peek()
        if token.kind != "IDENT":
            raise self.fail(f"expected {what} identifier, found {self.describe(token)}")
        self.advance()
        if not IDENTIFIER.match(token.value):
            self.diagnostics.append(
                make_diagnostic(
                    "E_PARSE",
                    f"{what} identifier '{token.value}' must match [a-z][a-z0-9_]*",
                    token.span,
                )
            )
        return token.value

    def ident_list(self, what: str) -> Tuple[str, ...]:
        items = [self.ident(what)]
        while self.accept_punct(","):
            items.append(self.ident(what))
        return tuple(items)

    def optional_string(self) -> Optional[str]:
        if self.peek().kind == "STRING":
            return self.advance().value
        return None

    def string(self) -> str:
        token = self.peek()
        if token.kind != "STRING":
            raise self.fail(f"expected string, found {self.describe(token)}")
        return self.advance().value

    def number(self) -> float:
        token = self.peek()
        if token.kind != "NUMBER":
            raise self.fail(f"expected number, found {self.describe(token)}")
        self.advance()
        return float(token.value)

    def integer(self) -> int:
        token = self.peek()
        if token.kind != "NUMBER" or not _INTEGER_RE.match(token.value):
            raise self.fail(f"expected integer, found {self.describe(token)}")
        self.advance()
        return int(token.value)

    def enum(self, enum_cls: Type[E], what: str) -> Optional[E]:
        token = self.peek()
        if token.kind != "IDENT":
            raise self.fail(f"expected {what}, found {self.describe(token)}")
        self.advance()
        try:
            return enum_cls(token.value)
        except ValueError:
            allowed = ", ".join(member.value for member in enum_cls)
            self.diagnostics.append(
                make_diagnostic(
                    "E_ENUM",
                    f"unknown {what} '{token.value}' (expected one of: {allowed})",
                    token.span,
                )
            )
            return None

    def declare(self, kind: str, key: Union[str, int], span: SourceSpan) -> None:
        seen = self._declared.setdefault(kind, set())
        if key in seen:
            self.diagnostics.append(
                make_diagnostic("E_DUP", f"duplicate {kind} id '{key}'", span)
            )
        seen.add(key)

    def block(self) -> Iterator[Token]:
        """Yield the first token of each statement until the closing brace"""
        self.expect_punct("{")
        while not self.at_punct("}"):
            token = self.peek()
            if token.kind == "EOF":
                raise self.fail("expected '}', found end of input")
            if token.kind != "IDENT":
                raise self.fail(f"unexpected {self.describe(token)}")
            yield token
        self.advance()

    # grammar

    def parse(self) -> ParseResult:
        try:
            model = self.architecture()
        except _SyntaxAbort:
            model = None
        if self.diagnostics:
            return ParseResult(None, sort_diagnostics(self.diagnostics))
        return ParseResult(model, [])

    def architecture(self) -> ArchitectureModel:
        if not self.at_keyword("architecture"):
            raise self.fail("expected 'architecture' block")
        start = self.advance()
        name = self.ident("architecture")
        views: Dict[str, object] = {}
        rationale = ""
        l2p: Optional[List[L2PEntry]] = None
        l2d: Optional[List[L2DEntry]] = None
        for token in self.block():
            word = token.value
            if word == "rationale":
                self.advance()
                rationale = self.string()
            elif word in ("logical", "process", "development", "physical", "scenarios"):
                self.advance()
                if word in views:
                    self.diagnostics.append(
                        make_diagnostic("E_DUP", f"duplicate {word} view", token.span)
                    )
                views[word] = getattr(self, f"{word}_view")(token.span)
            elif word == "map":
                self.advance()
                kind = self.peek()
                if self.accept_keyword("l2p"):
                    if l2p is not None:
                        self.diagnostics.append(
                            make_diagnostic("E_DUP", "duplicate map l2p", kind.span)
                        )
                    l2p = self.l2p_block()
                elif self.accept_keyword("l2d"):
                    if l2d is not None:
                        self.diagnostics.append(
                            make_diagnostic("E_DUP", "duplicate map l2d", kind.span)
                        )
                    l2d = self.l2d_block()
                else:
                    raise self.fail(
                        f"expected 'l2p' or 'l2d', found {self.describe(kind)}"
                    )
            else:
                raise self.fail(f"unexpected '{word}' in architecture block")
        if self.peek().kind != "EOF":
            raise self.fail("only one architecture block is allowed per file")
        return ArchitectureModel(
            name=name,
            rationale=rationale,
            logical=views.get("logical"),
            process=views.get("process"),
            development=views.get("development"),
            physical=views.get("physical"),
            scenarios=views.get("scenarios"),
            l2p=tuple(l2p or ()),
            l2d=tuple(l2d or ()),
            span=start.span,
        )

    def logical_view(self, span: SourceSpan) -> LogicalView:
        categories: List[ClassCategory] = []
        classes: List[Class] = []
        relations: List[Relation] = []
        rationale = ""
        for token in self.block():
            if token.value == "rationale":
                self.advance()
                rationale = self.string()
            elif token.value == "category":
                self.advance()
                categories.append(self.category(token.span, classes))
            elif token.value == "class":
                self.advance()
                classes.append(self.class_decl(token.span, None))
            elif token.value == "relations":
                self.advance()
                relations.extend(self.relations())
            else:
                raise self.fail(f"unexpected '{token.value}' in logical view")
        return LogicalView(tuple(categories), tuple(classes), tuple(relations), rationale, span)

    def category(self, span: SourceSpan, classes: List[Class]) -> ClassCategory:
        category_id = self.ident("category")
        self.declare("category", category_id, span)
        name = self.optional_string()
        members: List[str] = []
        for token in self.block():
            if token.value == "class":
                self.advance()
                cls = self.class_decl(token.span, category_id)
                classes.append(cls)
                members.append(cls.id)
            elif token.value == "member":
                self.advance()
                members.append(self.ident("class"))
            else:
                raise self.fail(f"unexpected '{token.value}' in category '{category_id}'")
        return ClassCategory(
            category_id, name if name is not None else category_id, tuple(members), span
        )

    def class_decl(self, span: SourceSpan, category: Optional[str]) -> Class:
        class_id = self.ident("class")
        self.declare("class", class_id, span)
        name = self.optional_string()
        fields: Dict[str, object] = {}
        operations: List[str] = []
        for token in self.block():
            word = token.value
            self.advance()
            # "autonomy active" and "autonomy: active" are the same field
            self.accept_punct(":")
            if word == "autonomy":
                fields["autonomy"] = self.enum(Autonomy, "autonomy")
            elif word == "persistence":
                fields["persistence"] = self.enum(Persistence, "persistence")
            elif word == "subordinate_to":
                fields["subordinate_to"] = self.ident("class")
            elif word == "distributed":
                fields["distributed"] = True
            elif word == "utility":
                fields["utility"] = True
            elif word == "cost":
                fields["est_cost"] = self.number()
            elif word in ("operations", "operation"):
                operations.extend(self.ident_list("operation"))
            elif word == "category" and category is None:
                category = self.ident("category")
            elif word == "category":
                raise self.fail(
                    "category is implied by the enclosing category block", token
                )
            else:
                raise self.fail(f"unexpected '{word}' in class '{class_id}'", token)
        return Class(
            id=class_id,
            name=name if name is not None else class_id,
            category=category,
            operations=tuple(operations),
            span=span,
            **{k: v for k, v in fields.items() if v is not None},
        )

    def relations(self) -> Iterator[Relation]:
        for token in self.block():
            self.advance()
            try:
                kind: Optional[RelationKind] = RelationKind(token.value)
            except ValueError:
                allowed = ", ".join(k.value for k in RelationKind)
                self.diagnostics.append(
                    make_diagnostic(
                        "E_ENUM",
                        f"unknown relation kind '{token.value}' (expected one of: {allowed})",
                        token.span,
                    )
                )
                kind = None
            source = self.ident("class")
            self.expect_punct("->")
            target = self.ident("class")
            if kind is not None:
                yield Relation(kind, source, target, token.span)

    def process_view(self, span: SourceSpan) -> ProcessView:
        processes: List[Process] = []
        connectors: List[Connector] = []
        rationale = ""
        for token in self.block():
            self.advance()
            if token.value == "rationale":
                rationale = self.string()
            elif token.value == "process":
                processes.append(self.process(token.span))
            elif token.value == "connector":
                kind = self.enum(ConnectorKind, "connector kind")
                source = self.ident("task")
                self.expect_punct("->")
                target = self.ident("task")
                if kind is not None:
                    connectors.append(Connector(kind, source, target, token.span))
            else:
                raise self.fail(f"unexpected '{token.value}' in process view", token)
        return ProcessView(tuple(processes), tuple(connectors), rationale, span)

    def process(self, span: SourceSpan) -> Process:
        process_id = self.ident("process")
        self.declare("process", process_id, span)
        name = self.optional_string()
        replicas = 1
        if self.accept_keyword("replicas"):
            replicas = self.integer()
        tasks: List[Task] = []
        for token in self.block():
            if token.value != "task":
                raise self.fail(f"unexpected '{token.value}' in process '{process_id}'")
            self.advance()
            tasks.append(self.task(token.span))
        return Process(
            process_id, name if name is not None else process_id, tuple(tasks), replicas, span
        )

    def task(self, span: SourceSpan) -> Task:
        task_id = self.ident("task")
        self.declare("task", task_id, span)
        name = self.optional_string()
        kind = TaskKind.MAJOR
        period: Optional[float] = None
        serial = False
        while self.at_keyword("major", "minor", "period", "serial"):
            word = self.advance().value
            if word == "period":
                period = self.number()
            elif word == "serial":
                serial = True
            else:
                kind = TaskKind(word)
        return Task(task_id, name if name is not None else task_id, kind, period, serial, span)

    def development_view(self, span: SourceSpan) -> DevelopmentView:
        layers: List[LayerDef] = []
        subsystems: List[Subsystem] = []
        dependencies: List[DevDependency] = []
        rationale = ""
        for token in self.block():
            self.advance()
            if token.value == "rationale":
                rationale = self.string()
            elif token.value == "layer":
                number = self.integer()
                self.declare("layer", number, token.span)
                name = self.optional_string()
                responsibility = self.optional_string() if name is not None else None
                layers.append(
                    LayerDef(number, name or "", responsibility or "", token.span)
                )
            elif token.value == "subsystem":
                subsystems.append(self.subsystem(token.span))
            elif token.value == "depends":
                source = self.ident("subsystem")
                self.expect_punct("->")
                target = self.ident("subsystem")
                dependencies.append(DevDependency(source, target, token.span))
            else:
                raise self.fail(f"unexpected '{token.value}' in development view", token)
        return DevelopmentView(
            tuple(layers), tuple(subsystems), tuple(dependencies), rationale, span
        )

    def subsystem(self, span: SourceSpan) -> Subsystem:
        subsystem_id = self.ident("subsystem")
        self.declare("subsystem", subsystem_id, span)
        name = self.optional_string()
        self.expect_keyword("layer")
        layer = self.integer()
        ksloc: Optional[float] = None
        if self.accept_keyword("ksloc"):
            ksloc = self.number()
        modules: List[str] = []
        if self.at_punct("{"):
            for token in self.block():
                self.advance()
                if token.value in ("module", "modules"):
                    modules.extend(self.ident_list("module"))
                else:
                    raise self.fail(
                        f"unexpected '{token.value}' in subsystem '{subsystem_id}'", token
                    )
        return Subsystem(
            subsystem_id,
            name if name is not None else subsystem_id,
            layer,
            tuple(modules),
            ksloc,
            span,
        )

    def physical_view(self, span: SourceSpan) -> PhysicalView:
        nodes: List[Node] = []
        links: List[Link] = []
        configurations: List[Configuration] = []
        rationale = ""
        for token in self.block():
            self.advance()
            if token.value == "rationale":
                rationale = self.string()
            elif token.value == "node":
                node_id = self.ident("node")
                self.declare("node", node_id, token.span)
                name = self.optional_string()
                capacity = self.number() if self.accept_keyword("capacity") else None
                nodes.append(
                    Node(node_id, name if name is not None else node_id, capacity, token.span)
                )
            elif token.value == "link":
                medium = self.enum(Medium, "link medium")
                endpoints = self.ident_list("node")
                bandwidth = self.number() if self.accept_keyword("bandwidth") else None
                if medium is not None:
                    links.append(Link(medium, endpoints, bandwidth, token.span))
            elif token.value == "config":
                configurations.append(self.configuration(token.span))
            else:
                raise self.fail(f"unexpected '{token.value}' in physical view", token)
        return PhysicalView(
            tuple(nodes), tuple(links), tuple(configurations), rationale, span
        )

    def configuration(self, span: SourceSpan) -> Configuration:
        name = self.ident("configuration")
        self.declare("configuration", name, span)
        placements: List[Placement] = []
        for token in self.block():
            if token.value != "place":
                raise self.fail(f"unexpected '{token.value}' in configuration '{name}'")
            self.advance()
            process = self.ident("process")
            self.expect_keyword("on")
            nodes = self.ident_list("node")
            placements.append(Placement(process, nodes, token.span))
        return Configuration(name, tuple(placements), span)

    def scenarios_view(self, span: SourceSpan) -> ScenarioView:
        scenarios: List[Scenario] = []
        for token in self.block():
            if token.value != "scenario":
                raise self.fail(f"unexpected '{token.value}' in scenarios view")
            self.advance()
            scenarios.append(self.scenario(token.span))
        return ScenarioView(tuple(scenarios), span)

    def scenario(self, span: SourceSpan) -> Scenario:
        scenario_id = self.ident("scenario")
        self.declare("scenario", scenario_id, span)
        name = self.optional_string()
        frequency = self.number() if self.accept_keyword("freq") else None
        steps: List[Step] = []
        seqs: Set[int] = set()
        for token in self.block():
            if token.value != "step":
                raise self.fail(f"unexpected '{token.value}' in scenario '{scenario_id}'")
            self.advance()
            seq = self.integer()
            if seq in seqs:
                self.diagnostics.append(
                    make_diagnostic(
                        "E_DUP", f"duplicate step {seq} in '{scenario_id}'", token.span
                    )
                )
            seqs.add(seq)
            self.expect_punct(":")
            source = self.ident("class")
            self.expect_punct("->")
            target = self.ident("class")
            self.expect_punct(".")
            operation = self.ident("operation")
            hint = None
            if self.accept_keyword("via"):
                hint = self.enum(ConnectorKind, "connector kind")
            steps.append(Step(seq, source, target, operation, hint, token.span))
        return Scenario(
            scenario_id,
            name if name is not None else scenario_id,
            frequency,
            tuple(steps),
            span,
        )

    def l2p_block(self) -> List[L2PEntry]:
        entries = []
        for token in self.block():
            self.expect_keyword("class")
            class_id = self.ident("class")
            self.declare("l2p entry", class_id, token.span)
            self.expect_punct("->")
            self.expect_keyword("tasks")
            entries.append(L2PEntry(class_id, self.ident_list("task"), token.span))
        return entries

    def l2d_block(self) -> List[L2DEntry]:
        entries = []
        for token in self.block():
            self.expect_keyword("class")
            class_id = self.ident("class")
            self.declare("l2d entry", class_id, token.span)
            self.expect_punct("->")
            modules = [self.module_ref()]
            while self.accept_punct(","):
                modules.append(self.module_ref())
            entries.append(L2DEntry(class_id, tuple(modules), token.span))
        return entries

    def module_ref(self) -> ModuleRef:
        subsystem = self.ident("subsystem")
        self.expect_punct(".")
        return ModuleRef(subsystem, self.ident("module"))


def parse(text: str, filename: str = "<input>") -> ParseResult:
    """Parse an .arch document; LF and CRLF line endings are both accepted"""
    result = ArchitectureParser(text, filename).parse()
    logger.debug(
        "document_parsed",
        file=filename,
        ok=result.ok,
        diagnostics=len(result.diagnostics),
    )
    return result


def parse_file(path: Union[str, Path]) -> ParseResult:
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        return ParseResult(
            None,
            [
                make_diagnostic(
                    "E_PARSE", f"document is not UTF-8: {e}", SourceSpan(str(path), 1, 1)
                )
            ],
        )
    return parse(text, str(path))


def _num(value: float) -> str:
    return repr(float(value))


class _Writer:
    def __init__(self) -> None:
        self.lines: List[str] = []
        self.depth = 0

    def line(self, text: str) -> None:
        self.lines.append("  " * self.depth + text)

    def open(self, header: str) -> None:
        self.line(header + " {")
        self.depth += 1

    def close(self) -> None:
        self.depth -= 1
        self.line("}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _class_body(out: _Writer, cls: Class, emit_category: bool) -> None:
    out.open(f"class {cls.id} {quote(cls.name)}")
    if emit_category and cls.category is not None:
        out.line(f"category {cls.category}")
    out.line(f"autonomy {cls.autonomy.value}")
    out.line(f"persistence {cls.persistence.value}")
    if cls.subordinate_to is not None:
        out.line(f"subordinate_to {cls.subordinate_to}")
    if cls.distributed:
        out.line("distributed")
    if cls.utility:
        out.line("utility")
    out.line(f"cost {_num(cls.est_cost)}")
    if cls.operations:
        out.line(f"operations {', '.join(cls.operations)}")
    out.close()


def _format_logical(out: _Writer, view: LogicalView) -> None:
    out.open("logical")
    if view.rationale:
        out.line(f"rationale {quote(view.rationale)}")
    nested: Set[str] = set()
    for category in view.categories:
        out.open(f"category {category.id} {quote(category.name)}")
        for member in category.members:
            cls = view.class_by_id.get(member)
            if cls is not None and cls.category == category.id and member not in nested:
                nested.add(member)
                _class_body(out, cls, emit_category=False)
            else:
                out.line(f"member {member}")
        out.close()
    for cls in view.classes:
        if cls.id not in nested:
            _class_body(out, cls, emit_category=True)
    if view.relations:
        out.open("relations")
        for relation in view.relations:
            out.line(f"{relation.kind.value} {relation.source} -> {relation.target}")
        out.close()
    out.close()


def _format_process(out: _Writer, view: ProcessView) -> None:
    out.open("process")
    if view.rationale:
        out.line(f"rationale {quote(view.rationale)}")
    for process in view.processes:
        out.open(f"process {process.id} {quote(process.name)} replicas {process.replicas}")
        for task in process.tasks:
            parts = [f"task {task.id} {quote(task.name)} {task.kind.value}"]
            if task.period_ms is not None:
                parts.append(f"period {_num(task.period_ms)}")
            if task.serial:
                parts.append("serial")
            out.line(" ".join(parts))
        out.close()
    for connector in view.connectors:
        out.line(
            f"connector {connector.kind.value} {connector.source} -> {connector.target}"
        )
    out.close()


def _format_development(out: _Writer, view: DevelopmentView) -> None:
    out.open("development")
    if view.rationale:
        out.line(f"rationale {quote(view.rationale)}")
    for layer in view.layers:
        out.line(f"layer {layer.number} {quote(layer.name)} {quote(layer.responsibility)}")
    for subsystem in view.subsystems:
        header = f"subsystem {subsystem.id} {quote(subsystem.name)} layer {subsystem.layer}"
        if subsystem.ksloc is not None:
            header += f" ksloc {_num(subsystem.ksloc)}"
        out.open(header)
        for module in subsystem.modules:
            out.line(f"module {module}")
        out.close()
    for dependency in view.dependencies:
        out.line(f"depends {dependency.source} -> {dependency.target}")
    out.close()


def _format_physical(out: _Writer, view: PhysicalView) -> None:
    out.open("physical")
    if view.rationale:
        out.line(f"rationale {quote(view.rationale)}")
    for node in view.nodes:
        text = f"node {node.id} {quote(node.name)}"
        if node.capacity is not None:
            text += f" capacity {_num(node.capacity)}"
        out.line(text)
    for link in view.links:
        text = f"link {link.medium.value} {', '.join(link.endpoints)}"
        if link.bandwidth is not None:
            text += f" bandwidth {_num(link.bandwidth)}"
        out.line(text)
    for config in view.configurations:
        out.open(f"config {config.name}")
        for placement in config.placements:
            out.line(f"place {placement.process} on {', '.join(placement.nodes)}")
        out.close()
    out.close()


def _format_scenarios(out: _Writer, view: ScenarioView) -> None:
    out.open("scenarios")
    for scenario in view.scenarios:
        header = f"scenario {scenario.id} {quote(scenario.name)}"
        if scenario.frequency_hz is not None:
            header += f" freq {_num(scenario.frequency_hz)}"
        out.open(header)
        for step in scenario.steps:
            text = f"step {step.seq}: {step.source} -> {step.target}.{step.operation}"
            if step.connector_hint is not None:
                text += f" via {step.connector_hint.value}"
            out.line(text)
        out.close()
    out.close()


def format_architecture(model: ArchitectureModel) -> str:
    """Canonical text: fixed section order, sorted entries, 2-space indent, LF"""
    out = _Writer()
    out.open(f"architecture {model.name}")
    if model.rationale:
        out.line(f"rationale {quote(model.rationale)}")
    if model.logical is not None:
        _format_logical(out, model.logical)
    if model.process is not None:
        _format_process(out, model.process)
    if model.development is not None:
        _format_development(out, model.development)
    if model.physical is not None:
        _format_physical(out, model.physical)
    if model.scenarios is not None:
        _format_scenarios(out, model.scenarios)
    if model.l2p:
        out.open("map l2p")
        for entry in model.l2p:
            out.line(f"class {entry.class_id} -> tasks {', '.join(entry.tasks)}")
        out.close()
    if model.l2d:
        out.open("map l2d")
        for entry in model.l2d:
            refs = ", ".join(str(ref) for ref in entry.modules)
            out.line(f"class {entry.class_id} -> {refs}")
        out.close()
    out.close()
    return out.text()
