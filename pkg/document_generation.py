#!/usr/bin/env python3
"""
Document Generation - Software Architecture Document skeleton in Markdown
Sections follow the classic SAD outline; view sections are filled from the
model with element tables and embedded DOT blueprints.
"""

import hashlib
from typing import Iterable, List, Optional, Sequence

import structlog

from architecture_model import ArchitectureModel, ViewKind, view_presence
from architecture_parser import format_architecture
from blueprint_render import to_dot
from diagnostics import Diagnostic, Severity, sort_diagnostics
from load_estimation import LoadReport

logger = structlog.get_logger(__name__)

OMITTED = "View omitted (tailored out)."

SAD_OUTLINE = (
    "# Title Page",
    "## Change History",
    "## Table of Contents",
    "## List of Figures",
    "## 1. Scope",
    "## 2. References",
    "## 3. Software Architecture",
    "## 4. Architectural Goals & Constraints",
    "## 5. Logical Architecture",
    "## 6. Process Architecture",
    "## 7. Development Architecture",
    "## 8. Physical Architecture",
    "## 9. Scenarios",
    "## 10. Size and Performance",
    "## 11. Quality",
    "## Appendices",
    "### A. Acronyms and Abbreviations",
    "### B. Definitions",
    "### C. Design Principles",
)

ACRONYMS = (
    ("DOT", "Graphviz graph description language"),
    ("KSLOC", "thousands of source lines of code"),
    ("LAN", "local area network"),
    ("RPC", "remote procedure call"),
    ("SAD", "Software Architecture Document"),
    ("WAN", "wide area network"),
)

DEFINITIONS = (
    ("Agent task", "a task multiplexing one thread of control across the objects of a class"),
    ("Class category", "a named grouping of related classes in the logical view"),
    ("Configuration", "a named placement of processes, with replicas, onto nodes"),
    ("Major task", "an individually addressable thread of control"),
    ("Minor task", "a local task allowed to use rendezvous or shared memory in its process"),
    ("Scenario", "a use-case instance scripted as ordered (object, operation) steps"),
    ("Subsystem", "development-view packaging unit assigned to one layer"),
)


def _cell(value: object) -> str:
    return str(value).replace("|", "\\|").replace("\n", " ")


def _table(header: Sequence[str], rows: Iterable[Sequence[object]]) -> List[str]:
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    lines.extend("| " + " | ".join(_cell(v) for v in row) + " |" for row in rows)
    return lines + [""]


def _dot_block(dot: str) -> List[str]:
    return ["```dot", dot.rstrip("\n"), "```", ""]


def _num(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:g}"


class _SadWriter:
    def __init__(
        self,
        model: ArchitectureModel,
        report: Optional[LoadReport],
        diagnostics: Sequence[Diagnostic],
    ):
        self.model = model
        self.report = report
        self.diagnostics = sort_diagnostics(diagnostics)
        self.present = view_presence(model)
        self.lines: List[str] = []

    def heading(self, text: str) -> None:
        self.lines.extend([text, ""])

    def para(self, text: str) -> None:
        self.lines.extend([text, ""])

    def figures(self) -> List[str]:
        figures = []
        for kind, title in (
            (ViewKind.LOGICAL, "Logical blueprint"),
            (ViewKind.PROCESS, "Process blueprint"),
            (ViewKind.DEVELOPMENT, "Development blueprint"),
            (ViewKind.PHYSICAL, "Physical blueprint"),
        ):
            if kind in self.present:
                figures.append(title)
        if self.model.scenarios is not None:
            figures.extend(
                f"Scenario blueprint: {s.id}" for s in self.model.scenarios.scenarios
            )
        return figures

    def write(self) -> str:
        model = self.model
        digest = hashlib.sha256(format_architecture(model).encode("utf-8")).hexdigest()

        self.heading(SAD_OUTLINE[0])
        self.para(f"**{model.name}**: Software Architecture Document")

        self.heading(SAD_OUTLINE[1])
        self.para(f"- generated from model `{model.name}` (sha256 {digest})")

        self.heading(SAD_OUTLINE[2])
        self.lines.extend(f"- {h.lstrip('# ')}" for h in SAD_OUTLINE[4:])
        self.lines.append("")

        self.heading(SAD_OUTLINE[3])
        figures = self.figures()
        if figures:
            self.lines.extend(
                f"- Figure {n}: {title}" for n, title in enumerate(figures, start=1)
            )
            self.lines.append("")
        else:
            self.para("No figures.")

        self.heading(SAD_OUTLINE[4])
        views = ", ".join(k.value for k in ViewKind if k in self.present) or "none"
        self.para(
            f"This document describes the software architecture of `{model.name}` "
            f"using the 4+1 view model. Views described: {views}."
        )

        self.heading(SAD_OUTLINE[5])
        self.para(f"- Architecture model `{model.name}` (sha256 {digest})")

        self.heading(SAD_OUTLINE[6])
        self.lines.extend(
            _table(
                ("view", "status"),
                (
                    (k.value, "described" if k in self.present else "omitted")
                    for k in ViewKind
                ),
            )
        )

        self.heading(SAD_OUTLINE[7])
        rationales = model.rationales()
        if rationales:
            self.lines.extend(f"- **{scope}**: {text}" for scope, text in rationales)
            self.lines.append("")
        else:
            self.para("No rationale recorded.")

        self.heading(SAD_OUTLINE[8])
        self.logical()
        self.heading(SAD_OUTLINE[9])
        self.process()
        self.heading(SAD_OUTLINE[10])
        self.development()
        self.heading(SAD_OUTLINE[11])
        self.physical()
        self.heading(SAD_OUTLINE[12])
        self.scenarios()
        self.heading(SAD_OUTLINE[13])
        self.size_and_performance()
        self.heading(SAD_OUTLINE[14])
        self.quality()

        self.heading(SAD_OUTLINE[15])
        self.heading(SAD_OUTLINE[16])
        self.lines.extend(_table(("acronym", "meaning"), ACRONYMS))
        self.heading(SAD_OUTLINE[17])
        self.lines.extend(_table(("term", "definition"), DEFINITIONS))
        self.heading(SAD_OUTLINE[18])
        if rationales:
            self.lines.extend(f"- {text}" for _, text in rationales)
            self.lines.append("")
        else:
            self.para("No design principles recorded.")

        while self.lines and not self.lines[-1]:
            self.lines.pop()
        return "\n".join(self.lines) + "\n"

    def logical(self) -> None:
        view = self.model.logical
        if view is None:
            self.para(OMITTED)
            return
        if view.categories:
            self.lines.extend(
                _table(
                    ("category", "name", "classes"),
                    ((c.id, c.name, ", ".join(c.members)) for c in view.categories),
                )
            )
        self.lines.extend(
            _table(
                ("class", "name", "category", "autonomy", "persistence", "operations"),
                (
                    (
                        c.id,
                        c.name,
                        c.category or "-",
                        c.autonomy.value,
                        c.persistence.value,
                        ", ".join(c.operations),
                    )
                    for c in view.classes
                ),
            )
        )
        if view.relations:
            self.lines.extend(
                _table(
                    ("relation", "from", "to"),
                    ((r.kind.value, r.source, r.target) for r in view.relations),
                )
            )
        self.lines.extend(_dot_block(to_dot(self.model, ViewKind.LOGICAL)))

    def process(self) -> None:
        view = self.model.process
        if view is None:
            self.para(OMITTED)
            return
        self.lines.extend(
            _table(
                ("process", "task", "kind", "period (ms)", "replicas"),
                (
                    (p.id, t.id, t.kind.value, _num(t.period_ms), p.replicas)
                    for p in view.processes
                    for t in p.tasks
                ),
            )
        )
        if view.connectors:
            self.lines.extend(
                _table(
                    ("connector", "from", "to"),
                    ((c.kind.value, c.source, c.target) for c in view.connectors),
                )
            )
        if self.model.l2p:
            self.lines.extend(
                _table(
                    ("class", "tasks"),
                    ((e.class_id, ", ".join(e.tasks)) for e in self.model.l2p),
                )
            )
        self.lines.extend(_dot_block(to_dot(self.model, ViewKind.PROCESS)))

    def development(self) -> None:
        view = self.model.development
        if view is None:
            self.para(OMITTED)
            return
        self.lines.extend(
            _table(
                ("layer", "name", "responsibility"),
                ((layer.number, layer.name, layer.responsibility) for layer in view.layers),
            )
        )
        self.lines.extend(
            _table(
                ("subsystem", "name", "layer", "KSLOC", "modules"),
                (
                    (s.id, s.name, s.layer, _num(s.ksloc), ", ".join(s.modules))
                    for s in view.subsystems
                ),
            )
        )
        if self.model.l2d:
            self.lines.extend(
                _table(
                    ("class", "modules"),
                    (
                        (e.class_id, ", ".join(str(m) for m in e.modules))
                        for e in self.model.l2d
                    ),
                )
            )
        self.lines.extend(_dot_block(to_dot(self.model, ViewKind.DEVELOPMENT)))

    def physical(self) -> None:
        view = self.model.physical
        if view is None:
            self.para(OMITTED)
            return
        self.lines.extend(
            _table(
                ("node", "name", "capacity"),
                ((n.id, n.name, _num(n.capacity)) for n in view.nodes),
            )
        )
        if view.links:
            self.lines.extend(
                _table(
                    ("link", "medium", "nodes", "bandwidth"),
                    (
                        (
                            link.label,
                            link.medium.value,
                            ", ".join(link.endpoints),
                            _num(link.bandwidth),
                        )
                        for link in view.links
                    ),
                )
            )
        for config in view.configurations:
            self.para(f"**Configuration {config.name}**")
            self.lines.extend(
                _table(
                    ("process", "nodes"),
                    ((p.process, ", ".join(p.nodes)) for p in config.placements),
                )
            )
        self.lines.extend(_dot_block(to_dot(self.model, ViewKind.PHYSICAL)))

    def scenarios(self) -> None:
        view = self.model.scenarios
        if view is None:
            self.para(OMITTED)
            return
        if not view.scenarios:
            self.para("No scenarios scripted.")
        for scenario in view.scenarios:
            frequency = (
                f", {scenario.frequency_hz:g} Hz"
                if scenario.frequency_hz is not None
                else ""
            )
            self.para(f"**Scenario {scenario.id}** ({scenario.name}{frequency})")
            for step in scenario.steps:
                via = (
                    f" via {step.connector_hint.value}" if step.connector_hint else ""
                )
                self.lines.append(
                    f"{step.seq}. `{step.source}` -> `{step.target}.{step.operation}`{via}"
                )
            if scenario.steps:
                self.lines.append("")
            self.lines.extend(_dot_block(to_dot(self.model, "scenario", scenario.id)))

    def size_and_performance(self) -> None:
        report = self.report
        if report is None:
            self.para("No load estimate supplied.")
            return
        self.para(f"Load estimate for configuration `{report.configuration}`.")
        self.lines.extend(
            _table(
                ("process", "msgs/s", "cost/s", "activations/s"),
                (
                    (
                        pid,
                        f"{load.msgs_per_sec:.6g}",
                        f"{load.cost_per_sec:.6g}",
                        f"{load.activations_per_sec:.6g}",
                    )
                    for pid, load in sorted(report.per_process.items())
                ),
            )
        )
        self.lines.extend(
            _table(
                ("node", "cost/s", "utilization"),
                (
                    (
                        nid,
                        f"{load.cost_per_sec:.6g}",
                        "-" if load.utilization is None else f"{load.utilization:.6g}",
                    )
                    for nid, load in sorted(report.per_node.items())
                ),
            )
        )
        if report.per_connector:
            self.lines.extend(
                _table(
                    ("connector", "msgs/s"),
                    ((k, f"{v:.6g}") for k, v in sorted(report.per_connector.items())),
                )
            )
        if report.per_link:
            self.lines.extend(
                _table(
                    ("link", "msgs/s"),
                    ((k, f"{v:.6g}") for k, v in sorted(report.per_link.items())),
                )
            )
        self.para(f"Total: {report.total_msgs_per_sec:.6g} messages/sec.")

    def quality(self) -> None:
        findings = [
            d
            for d in self.diagnostics
            if d.severity in (Severity.WARNING, Severity.INFO)
        ]
        if not findings:
            self.para("No warnings or informational findings.")
            return
        self.lines.extend(f"- `{d.format()}`" for d in findings)
        self.lines.append("")


def generate(
    model: ArchitectureModel,
    report: Optional[LoadReport] = None,
    diagnostics: Sequence[Diagnostic] = (),
) -> str:
    """Render the Software Architecture Document for a resolved model"""
    document = _SadWriter(model, report, diagnostics).write()
    logger.debug("document_generated", model=model.name, chars=len(document))
    return document
