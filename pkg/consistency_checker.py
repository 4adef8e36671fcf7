#!/usr/bin/env python3
"""
Consistency Checker - evaluates the architecture rule catalog
Layering, collocation, mapping totality, placement and scenario rules over
a resolved model, plus scenario tracing through the logical-to-process map
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

import networkx as nx
import structlog
from pydantic import BaseModel, ConfigDict, field_validator

from architecture_model import (
    ArchitectureModel,
    Connector,
    ConnectorKind,
    INTER_PROCESS_KINDS,
    Scenario,
    TaskKind,
    ViewKind,
    is_subordinate_to,
    view_presence,
)
from diagnostics import (
    RULE_CATALOG,
    Diagnostic,
    Severity,
    UnknownScenarioError,
    make_diagnostic,
    sort_diagnostics,
)

logger = structlog.get_logger(__name__)

UNMAPPED = "unmapped"

SKETCH_DOWNGRADED: FrozenSet[str] = frozenset({"S001", "S002", "M001", "M004"})


class CheckMode(str, Enum):
    STRICT = "strict"
    SKETCH = "sketch"


class CheckOptions(BaseModel):
    """How check() filters and grades findings"""

    model_config = ConfigDict(frozen=True)

    mode: CheckMode = CheckMode.STRICT
    warnings_as_errors: bool = False
    disabled_rules: FrozenSet[str] = frozenset()

    @field_validator("disabled_rules")
    @classmethod
    def _known_rules(cls, value: FrozenSet[str]) -> FrozenSet[str]:
        unknown = sorted(value - set(RULE_CATALOG))
        if unknown:
            raise ValueError(f"unknown rule id(s): {', '.join(unknown)}")
        return value


class Crossing(Enum):
    SAME_TASK = "same_task"
    SAME_PROCESS = "same_process"
    CROSS_PROCESS = "cross_process"


@dataclass(frozen=True)
class Hop:
    seq: int
    source_task: str
    target_task: str
    crossing: Optional[Crossing] = None
    connector: Optional[Connector] = None

    @property
    def mapped(self) -> bool:
        return self.crossing is not None


@dataclass(frozen=True)
class Trace:
    scenario: str
    hops: Tuple[Hop, ...] = ()

    def cross_process_hops(self) -> List[Hop]:
        return [h for h in self.hops if h.crossing is Crossing.CROSS_PROCESS]


def _pick_connector(
    model: ArchitectureModel, a: str, b: str, allowed, hint: Optional[ConnectorKind]
) -> Optional[Connector]:
    candidates = [
        c for c in model.process.connectors if c.joins(a, b) and c.kind in allowed
    ]
    if not candidates:
        return None
    # a step's "via" hint overrides kind order whenever a connector of that
    # kind joins the two tasks; otherwise the lowest kind in enum order wins
    if hint is not None:
        for connector in candidates:
            if connector.kind is hint:
                return connector
    return min(candidates, key=lambda c: (c.kind.rank, c.source, c.target))


def _dispatch_task(model: ArchitectureModel, class_id: str) -> str:
    if model.process is None:
        return UNMAPPED
    tasks = model.l2p_map.get(class_id, ())
    if tasks and tasks[0] in model.process.task_by_id:
        return tasks[0]
    return UNMAPPED


def _trace(model: ArchitectureModel, scenario: Scenario) -> Tuple[Trace, List[Diagnostic]]:
    found: List[Diagnostic] = []
    classes = model.logical.class_by_id if model.logical else {}
    hops = []
    for step in scenario.steps:
        for end in (step.source, step.target):
            if end not in classes:
                found.append(
                    make_diagnostic(
                        "S001",
                        f"step {step.seq} of '{scenario.id}' references missing class '{end}'",
                        step.span,
                    )
                )
        target = classes.get(step.target)
        if target is not None and step.operation not in target.operations:
            found.append(
                make_diagnostic(
                    "S001",
                    f"step {step.seq} of '{scenario.id}' calls missing operation "
                    f"'{step.target}.{step.operation}'",
                    step.span,
                )
            )
        source_task = _dispatch_task(model, step.source)
        target_task = _dispatch_task(model, step.target)
        if UNMAPPED in (source_task, target_task):
            hops.append(Hop(step.seq, source_task, target_task))
            continue
        owner = model.process.process_of_task
        if source_task == target_task:
            hops.append(Hop(step.seq, source_task, target_task, Crossing.SAME_TASK))
        elif owner[source_task] == owner[target_task]:
            connector = _pick_connector(
                model, source_task, target_task, set(ConnectorKind), step.connector_hint
            )
            hops.append(
                Hop(step.seq, source_task, target_task, Crossing.SAME_PROCESS, connector)
            )
        else:
            connector = _pick_connector(
                model, source_task, target_task, INTER_PROCESS_KINDS, step.connector_hint
            )
            if connector is None:
                found.append(
                    make_diagnostic(
                        "S002",
                        f"step {step.seq} of '{scenario.id}' crosses from process "
                        f"'{owner[source_task]}' to '{owner[target_task]}' without a "
                        f"message/rpc/broadcast connector between '{source_task}' "
                        f"and '{target_task}'",
                        step.span,
                    )
                )
            hops.append(
                Hop(step.seq, source_task, target_task, Crossing.CROSS_PROCESS, connector)
            )
    return Trace(scenario.id, tuple(hops)), found


def trace(model: ArchitectureModel, scenario_id: str) -> Tuple[Trace, List[Diagnostic]]:
    """Resolve a scenario script to task hops; S001/S002 findings come back inline"""
    scenario = model.scenarios.scenario_by_id.get(scenario_id) if model.scenarios else None
    if scenario is None:
        raise UnknownScenarioError(f"unknown scenario '{scenario_id}'")
    result, found = _trace(model, scenario)
    return result, sort_diagnostics(found)


# Rules. Each takes the model and returns its raw findings; check() gates
# them on view presence.


def _rule_d001(model: ArchitectureModel) -> List[Diagnostic]:
    view = model.development
    layer_of = {s.id: s.layer for s in view.subsystems}
    found = []
    for dep in view.dependencies:
        if dep.source not in layer_of or dep.target not in layer_of:
            continue
        if layer_of[dep.target] > layer_of[dep.source]:
            found.append(
                make_diagnostic(
                    "D001",
                    f"subsystem '{dep.source}' (layer {layer_of[dep.source]}) depends on "
                    f"'{dep.target}' in higher layer {layer_of[dep.target]}",
                    dep.span,
                )
            )
    return found


def _rule_d002(model: ArchitectureModel) -> List[Diagnostic]:
    count = len(model.development.layers)
    if 4 <= count <= 6:
        return []
    return [
        make_diagnostic(
            "D002",
            f"development view defines {count} layers, typical range is 4 to 6",
            model.development.span or model.span,
        )
    ]


def _rule_d003(model: ArchitectureModel) -> List[Diagnostic]:
    return [
        make_diagnostic(
            "D003",
            f"subsystem '{s.id}' is {s.ksloc:g} KSLOC, typical range is 5 to 20",
            s.span,
        )
        for s in model.development.subsystems
        if s.ksloc is not None and not 5 <= s.ksloc <= 20
    ]


def _rule_d004(model: ArchitectureModel) -> List[Diagnostic]:
    view = model.development
    subsystems = view.subsystem_by_id
    graph = nx.DiGraph()
    for dep in view.dependencies:
        source, target = subsystems.get(dep.source), subsystems.get(dep.target)
        if source is not None and target is not None and source.layer == target.layer:
            graph.add_edge(dep.source, dep.target)
    found = []
    for component in nx.strongly_connected_components(graph):
        if len(component) < 2:
            continue
        members = sorted(component)
        found.append(
            make_diagnostic(
                "D004",
                f"dependency cycle within layer {subsystems[members[0]].layer}: "
                f"{', '.join(members)}",
                subsystems[members[0]].span,
            )
        )
    return found


def _rule_p001(model: ArchitectureModel) -> List[Diagnostic]:
    owner = model.process.process_of_task
    found = []
    for connector in model.process.connectors:
        if connector.kind in INTER_PROCESS_KINDS:
            continue
        source, target = owner.get(connector.source), owner.get(connector.target)
        if source is not None and target is not None and source != target:
            found.append(
                make_diagnostic(
                    "P001",
                    f"{connector.kind.value} connector joins '{connector.source}' "
                    f"(process '{source}') and '{connector.target}' (process '{target}')",
                    connector.span,
                )
            )
    return found


def _rule_p002(model: ArchitectureModel) -> List[Diagnostic]:
    found = []
    for process in model.process.processes:
        for task in process.tasks:
            if task.kind is not TaskKind.MAJOR:
                continue
            kinds = {
                c.kind
                for c in model.process.connectors
                if task.id in (c.source, c.target)
            }
            if kinds and not kinds & INTER_PROCESS_KINDS:
                found.append(
                    make_diagnostic(
                        "P002",
                        f"major task '{task.id}' communicates only by "
                        f"{'/'.join(sorted(k.value for k in kinds))}",
                        task.span,
                    )
                )
    return found


def _rule_m001(model: ArchitectureModel) -> List[Diagnostic]:
    mapped = model.l2p_map
    return [
        make_diagnostic("M001", f"class '{c.id}' is not mapped to any task", c.span)
        for c in model.logical.classes
        if c.id not in mapped
    ]


def _rule_m002(model: ArchitectureModel) -> List[Diagnostic]:
    mapped = model.l2p_map
    found = []
    for cls in model.logical.classes:
        master = cls.subordinate_to
        if master is None or cls.id not in mapped or master not in mapped:
            continue
        outside = sorted(set(mapped[cls.id]) - set(mapped[master]))
        if outside:
            found.append(
                make_diagnostic(
                    "M002",
                    f"class '{cls.id}' is subordinate to '{master}' but runs on "
                    f"task(s) {', '.join(outside)} outside its master's",
                    cls.span,
                )
            )
    return found


def _rule_m003(model: ArchitectureModel) -> List[Diagnostic]:
    logical = model.logical
    tasks = model.process.task_by_id
    by_task: Dict[str, List[str]] = {}
    for entry in model.l2p:
        for task in entry.tasks:
            by_task.setdefault(task, []).append(entry.class_id)
    found = []
    for cls in logical.classes:
        if not cls.is_active or cls.subordinate_to is not None:
            continue
        own = model.l2p_map.get(cls.id)
        if not own:
            continue

        def shared(task_id: str) -> bool:
            task = tasks.get(task_id)
            if task is not None and task.serial:
                return False
            for other_id in by_task.get(task_id, ()):
                other = logical.class_by_id.get(other_id)
                if (
                    other is not None
                    and other.id != cls.id
                    and not is_subordinate_to(logical, other.id, cls.id)
                ):
                    return True
            return False

        if all(shared(t) for t in own):
            found.append(
                make_diagnostic(
                    "M003",
                    f"active class '{cls.id}' has no dedicated agent task",
                    cls.span,
                )
            )
    return found


def _rule_m004(model: ArchitectureModel) -> List[Diagnostic]:
    mapped = model.l2d_map
    return [
        make_diagnostic("M004", f"class '{c.id}' is not mapped to any module", c.span)
        for c in model.logical.classes
        if c.id not in mapped
    ]


def _rule_ph01(model: ArchitectureModel) -> List[Diagnostic]:
    found = []
    for config in model.physical.configurations:
        placement = config.placement
        for process in model.process.processes:
            nodes = placement.get(process.id)
            if nodes is None:
                found.append(
                    make_diagnostic(
                        "PH01",
                        f"configuration '{config.name}' does not place process "
                        f"'{process.id}'",
                        config.span,
                    )
                )
            elif len(nodes) != process.replicas:
                found.append(
                    make_diagnostic(
                        "PH01",
                        f"configuration '{config.name}' places {len(nodes)} replica(s) "
                        f"of '{process.id}', expected {process.replicas}",
                        config.span,
                    )
                )
    return found


def _rule_l001(model: ArchitectureModel) -> List[Diagnostic]:
    logical = model.logical
    found = []
    for cls in logical.classes:
        if cls.category is None:
            found.append(
                make_diagnostic(
                    "L001", f"class '{cls.id}' is not assigned to any category", cls.span
                )
            )
            continue
        category = logical.category_by_id.get(cls.category)
        if category is not None and cls.id not in category.members:
            found.append(
                make_diagnostic(
                    "L001",
                    f"class '{cls.id}' names category '{cls.category}' which does not "
                    f"list it",
                    cls.span,
                )
            )
        for other in logical.categories:
            if other.id != cls.category and cls.id in other.members:
                found.append(
                    make_diagnostic(
                        "L001",
                        f"class '{cls.id}' is listed by category '{other.id}' but "
                        f"belongs to '{cls.category}'",
                        other.span,
                    )
                )
    return found


def _rule_scenarios(model: ArchitectureModel) -> List[Diagnostic]:
    found: List[Diagnostic] = []
    for scenario in model.scenarios.scenarios:
        found.extend(_trace(model, scenario)[1])
    return found


_RULES: List[Tuple[Tuple[str, ...], Callable[[ArchitectureModel], List[Diagnostic]]]] = [
    (("D001",), _rule_d001),
    (("D002",), _rule_d002),
    (("D003",), _rule_d003),
    (("D004",), _rule_d004),
    (("P001",), _rule_p001),
    (("P002",), _rule_p002),
    (("M001",), _rule_m001),
    (("M002",), _rule_m002),
    (("M003",), _rule_m003),
    (("M004",), _rule_m004),
    (("PH01",), _rule_ph01),
    (("L001",), _rule_l001),
    (("S001", "S002"), _rule_scenarios),
]


def _views_present(rule: str, present: FrozenSet[ViewKind]) -> bool:
    return all(ViewKind(view) in present for view in RULE_CATALOG[rule].views)


def check(
    model: ArchitectureModel, options: Optional[CheckOptions] = None
) -> List[Diagnostic]:
    """Evaluate every enabled rule whose views are present"""
    options = options or CheckOptions()
    present = view_presence(model)
    found: List[Diagnostic] = [
        make_diagnostic(
            "T001", f"{kind.value} view absent; dependent rules skipped", model.span
        )
        for kind in ViewKind
        if kind not in present
    ]
    for rules, evaluate in _RULES:
        enabled = [r for r in rules if _views_present(r, present)]
        if not enabled:
            continue
        findings = [d for d in evaluate(model) if d.rule in enabled]
        logger.debug("rule_evaluated", rules=list(rules), findings=len(findings))
        found.extend(findings)

    graded = []
    for diagnostic in found:
        if options.mode is CheckMode.SKETCH and diagnostic.rule in SKETCH_DOWNGRADED:
            if diagnostic.severity is Severity.ERROR:
                diagnostic = diagnostic.with_severity(Severity.WARNING)
        if options.warnings_as_errors and diagnostic.severity is Severity.WARNING:
            diagnostic = diagnostic.with_severity(Severity.ERROR)
        if diagnostic.rule not in options.disabled_rules:
            graded.append(diagnostic)

    result = sort_diagnostics(graded)
    logger.debug("model_checked", model=model.name, diagnostics=len(result))
    return result
