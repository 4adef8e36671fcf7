#!/usr/bin/env python3
"""
Blueprint Render - one Graphviz DOT digraph per architectural view
Booch icons are approximated with standard DOT shapes (see docs/notation.md)
"""

from typing import Iterator, Optional, Union

import structlog

from architecture_model import (
    ArchitectureModel,
    ClassCategory,
    LogicalView,
    RelationKind,
    TaskKind,
    ViewKind,
)
from diagnostics import UnknownScenarioError, ViewAbsentError

logger = structlog.get_logger(__name__)

BLUEPRINTS = ("logical", "process", "development", "physical", "scenario")

LEGENDS = {
    "logical": "class=ellipse category=cluster inheritance=empty-arrow "
    "association=plain containment=diamond-tail usage=dashed",
    "process": "task=box (minor=dashed) process=cluster connector=edge labelled by kind",
    "development": "subsystem=box3d layer=ranked cluster (layer 1 lowest) "
    "dependency=edge",
    "physical": "node=house link=undirected edge labelled by medium "
    "(hub point for multi-node links) configuration=note",
    "scenario": "class=ellipse step=edge labelled 'n: operation'",
}

_RELATION_STYLE = {
    RelationKind.INHERITANCE: "arrowhead=empty",
    RelationKind.ASSOCIATION: "arrowhead=none",
    RelationKind.CONTAINMENT: "dir=both, arrowtail=diamond, arrowhead=none",
    RelationKind.USAGE: "style=dashed",
}


def _gvquote(s: str) -> str:
    escaped = s.replace("\\", "\\\\").replace('"', r"\"").replace("\n", r"\n")
    return f'"{escaped}"'


def _node(kind: str, ident: str) -> str:
    return _gvquote(f"{kind}.{ident}")


def _class_node(cls_id: str, label: str, indent: str) -> str:
    return f"{indent}{_node('class', cls_id)} [shape=ellipse, label={_gvquote(label)}];"


def _logical(view: LogicalView) -> Iterator[str]:
    placed = set()

    def cluster(category: ClassCategory) -> Iterator[str]:
        yield f"  subgraph {_gvquote('cluster_' + category.id)} {{"
        yield f"    label={_gvquote(category.name or category.id)};"
        for member in category.members:
            cls = view.class_by_id.get(member)
            if cls is not None and cls.category == category.id and member not in placed:
                placed.add(member)
                yield _class_node(cls.id, cls.name or cls.id, "    ")
        yield "  }"

    for category in view.categories:
        yield from cluster(category)
    for cls in view.classes:
        if cls.id not in placed:
            yield _class_node(cls.id, cls.name or cls.id, "  ")
    for relation in view.relations:
        yield (
            f"  {_node('class', relation.source)} -> {_node('class', relation.target)}"
            f" [{_RELATION_STYLE[relation.kind]}];"
        )


def _process(model: ArchitectureModel) -> Iterator[str]:
    view = model.process
    for process in view.processes:
        label = process.name or process.id
        if process.replicas > 1:
            label += f" x{process.replicas}"
        yield f"  subgraph {_gvquote('cluster_' + process.id)} {{"
        yield f"    label={_gvquote(label)};"
        for task in process.tasks:
            attrs = ["shape=box", f"label={_gvquote(task.name or task.id)}"]
            if task.kind is TaskKind.MINOR:
                attrs.append("style=dashed")
            if task.period_ms is not None:
                attrs.append(f"xlabel={_gvquote(f'{task.period_ms:g} ms')}")
            yield f"    {_node('task', task.id)} [{', '.join(attrs)}];"
        yield "  }"
    for connector in view.connectors:
        yield (
            f"  {_node('task', connector.source)} -> {_node('task', connector.target)}"
            f" [label={_gvquote(connector.kind.value)}];"
        )


def _development(model: ArchitectureModel) -> Iterator[str]:
    view = model.development
    for layer in view.layers:
        members = [s for s in view.subsystems if s.layer == layer.number]
        title = f"{layer.number}: {layer.name}" if layer.name else str(layer.number)
        yield f"  subgraph {_gvquote(f'cluster_layer_{layer.number}')} {{"
        yield f"    label={_gvquote(title)};"
        yield "    rank=same;"
        yield (
            f"    {_node('layer', str(layer.number))} [shape=plaintext, "
            f"label={_gvquote(layer.responsibility or title)}];"
        )
        for subsystem in members:
            yield (
                f"    {_node('subsystem', subsystem.id)} [shape=box3d, "
                f"label={_gvquote(subsystem.name or subsystem.id)}];"
            )
        yield "  }"
    numbers = [layer.number for layer in view.layers]
    for upper, lower in zip(reversed(numbers), list(reversed(numbers))[1:]):
        yield (
            f"  {_node('layer', str(upper))} -> {_node('layer', str(lower))}"
            " [style=invis];"
        )
    declared = {layer.number for layer in view.layers}
    for subsystem in view.subsystems:
        if subsystem.layer not in declared:
            yield (
                f"  {_node('subsystem', subsystem.id)} [shape=box3d, "
                f"label={_gvquote(subsystem.name or subsystem.id)}];"
            )
    for dependency in view.dependencies:
        yield (
            f"  {_node('subsystem', dependency.source)} -> "
            f"{_node('subsystem', dependency.target)};"
        )


def _physical(model: ArchitectureModel) -> Iterator[str]:
    view = model.physical
    for node in view.nodes:
        label = node.name or node.id
        if node.capacity is not None:
            label += f"\n{node.capacity:g}"
        yield f"  {_node('node', node.id)} [shape=house, label={_gvquote(label)}];"
    for index, link in enumerate(view.links, start=1):
        medium = _gvquote(link.medium.value)
        if len(link.endpoints) == 2:
            a, b = link.endpoints
            yield (
                f"  {_node('node', a)} -> {_node('node', b)}"
                f" [dir=none, label={medium}];"
            )
            continue
        hub = _node("link", str(index))
        yield f"  {hub} [shape=point, xlabel={medium}];"
        for end in link.endpoints:
            yield f"  {hub} -> {_node('node', end)} [dir=none];"
    for config in view.configurations:
        note = "\n".join(
            [config.name]
            + [f"{p.process}: {', '.join(p.nodes)}" for p in config.placements]
        )
        yield (
            f"  {_node('config', config.name)} [shape=note, "
            f"label={_gvquote(note)}];"
        )


def _scenario(model: ArchitectureModel, scenario_id: Optional[str]) -> Iterator[str]:
    if scenario_id is None:
        raise UnknownScenarioError("the scenario blueprint needs a scenario id")
    scenario = model.scenarios.scenario_by_id.get(scenario_id)
    if scenario is None:
        raise UnknownScenarioError(f"unknown scenario '{scenario_id}'")
    classes = model.logical.class_by_id if model.logical else {}
    involved = sorted({c for s in scenario.steps for c in (s.source, s.target)})
    for cls_id in involved:
        cls = classes.get(cls_id)
        yield _class_node(cls_id, cls.name if cls is not None and cls.name else cls_id, "  ")
    for step in scenario.steps:
        yield (
            f"  {_node('class', step.source)} -> {_node('class', step.target)}"
            f" [label={_gvquote(f'{step.seq}: {step.operation}')}];"
        )


def to_dot(
    model: ArchitectureModel,
    view: Union[str, ViewKind],
    scenario: Optional[str] = None,
) -> str:
    """Render one view of the model as a DOT digraph"""
    name = view.value if isinstance(view, ViewKind) else view
    if name == "scenarios":
        name = "scenario"
    if name not in BLUEPRINTS:
        raise ValueError(f"unknown view '{name}' (expected one of: {', '.join(BLUEPRINTS)})")
    kind = ViewKind.SCENARIOS if name == "scenario" else ViewKind(name)
    if model.view(kind) is None:
        raise ViewAbsentError(f"model '{model.name}' has no {kind.value} view")

    if name == "logical":
        body = list(_logical(model.logical))
    elif name == "process":
        body = list(_process(model))
    elif name == "development":
        body = list(_development(model))
    elif name == "physical":
        body = list(_physical(model))
    else:
        body = list(_scenario(model, scenario))

    header = [
        f"// {name} blueprint of {model.name}",
        f"// legend: {LEGENDS[name]}",
    ]
    if not body:
        lines = header + [f"digraph {name} {{}}"]
    else:
        graph = [f"digraph {name} {{"]
        if name == "development":
            graph.append("  newrank=true;")
        lines = header + graph + body + ["}"]
    logger.debug("blueprint_rendered", view=name, statements=len(body))
    return "\n".join(lines) + "\n"
