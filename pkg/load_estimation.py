#!/usr/bin/env python3
"""
Load Estimation - analytic steady-state loads for a physical configuration
Scenario frequencies drive message rates and cost rates through the traced
process hops; cyclic tasks add their activation load ("hollow" architecture).
"""

import io
import json
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Tuple

import structlog
from rich import box
from rich.console import Console
from rich.table import Table

from architecture_model import ArchitectureModel, resolve
from consistency_checker import CheckMode, CheckOptions, Crossing, check, trace
from diagnostics import (
    Diagnostic,
    UncheckedModelError,
    Severity,
    UnknownConfigurationError,
    make_diagnostic,
    sort_diagnostics,
)
from type_definitions import LoadReportRecord

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class ProcessLoad:
    msgs_per_sec: float = 0.0
    cost_per_sec: float = 0.0
    activations_per_sec: float = 0.0


@dataclass(frozen=True)
class NodeLoad:
    cost_per_sec: float = 0.0
    utilization: Optional[float] = None


@dataclass(frozen=True)
class LoadReport:
    configuration: str
    per_process: Dict[str, ProcessLoad] = field(default_factory=dict)
    per_connector: Dict[str, float] = field(default_factory=dict)
    per_node: Dict[str, NodeLoad] = field(default_factory=dict)
    per_link: Dict[str, float] = field(default_factory=dict)
    total_msgs_per_sec: float = 0.0
    diagnostics: Tuple[Diagnostic, ...] = ()


def _require_checked(model: ArchitectureModel, options: CheckOptions) -> None:
    blocking = [d for d in resolve(model) if d.severity is Severity.ERROR]
    if not blocking:
        blocking = [d for d in check(model, options) if d.severity is Severity.ERROR]
    if blocking:
        raise UncheckedModelError(
            f"model '{model.name}' has {len(blocking)} outstanding error(s)", blocking
        )


def estimate(
    model: ArchitectureModel,
    config_name: str,
    options: Optional[CheckOptions] = None,
) -> LoadReport:
    """
    Estimate process, connector, node and link rates for one configuration

    The model is gated by check() in sketch mode unless options say otherwise:
    unmapped classes are tolerated and their hops are reported as LD02.
    """
    physical = model.physical
    config = physical.configuration_by_name.get(config_name) if physical else None
    if config is None:
        raise UnknownConfigurationError(f"unknown configuration '{config_name}'")
    _require_checked(model, options or CheckOptions(mode=CheckMode.SKETCH))

    process_view = model.process
    processes = process_view.processes if process_view else ()
    owner = process_view.process_of_task if process_view else {}
    classes = model.logical.class_by_id if model.logical else {}

    msgs = {p.id: 0.0 for p in processes}
    cost = {p.id: 0.0 for p in processes}
    activations = {p.id: 0.0 for p in processes}
    per_connector = {c.label: 0.0 for c in (process_view.connectors if process_view else ())}
    connector_ends: Dict[str, Tuple[str, str]] = {}
    total = 0.0
    found: List[Diagnostic] = []

    scenarios = model.scenarios.scenarios if model.scenarios else ()
    for scenario in scenarios:
        frequency = scenario.frequency_hz
        if frequency is None:
            found.append(
                make_diagnostic(
                    "LD01",
                    f"scenario '{scenario.id}' has no frequency and contributes no load",
                    scenario.span,
                )
            )
            continue
        hops, _ = trace(model, scenario.id)
        for step, hop in zip(scenario.steps, hops.hops):
            if not hop.mapped:
                found.append(
                    make_diagnostic(
                        "LD02",
                        f"step {step.seq} of '{scenario.id}' has an unmapped endpoint "
                        "and contributes no load",
                        step.span,
                    )
                )
                continue
            receiver = owner[hop.target_task]
            cost[receiver] += frequency * classes[step.target].est_cost
            if hop.crossing is Crossing.CROSS_PROCESS and hop.connector is not None:
                label = hop.connector.label
                per_connector[label] += frequency
                connector_ends[label] = (
                    owner[hop.connector.source],
                    owner[hop.connector.target],
                )
                msgs[receiver] += frequency
                total += frequency

    for process in processes:
        task_ids = {t.id for t in process.tasks}
        mapped_costs = [
            classes[entry.class_id].est_cost
            for entry in model.l2p
            if entry.class_id in classes and task_ids.intersection(entry.tasks)
        ]
        cheapest = min(mapped_costs) if mapped_costs else 1.0
        for task in process.tasks:
            if task.period_ms is None:
                continue
            rate = 1000.0 / task.period_ms
            activations[process.id] += rate
            cost[process.id] += rate * cheapest

    placement = config.placement
    replicas = {p.id: p.replicas for p in processes}
    node_cost = {n.id: 0.0 for n in physical.nodes}
    for process in processes:
        nodes = placement.get(process.id, ())
        for node in nodes:
            node_cost[node] += cost[process.id] / replicas[process.id]

    per_link = {link.label: 0.0 for link in physical.links}
    for label, (source, target) in sorted(connector_ends.items()):
        pairs = list(product(placement.get(source, ()), placement.get(target, ())))
        if not pairs:
            continue
        share = per_connector[label] / len(pairs)
        for a, b in pairs:
            if a == b:
                continue
            link = next(
                (
                    candidate
                    for candidate in physical.links
                    if {a, b} <= set(candidate.endpoints)
                ),
                None,
            )
            if link is None:
                logger.warning("no_link_between_nodes", connector=label, nodes=[a, b])
                continue
            per_link[link.label] += share

    per_node = {}
    for node in physical.nodes:
        utilization = (
            node_cost[node.id] / node.capacity if node.capacity is not None else None
        )
        per_node[node.id] = NodeLoad(node_cost[node.id], utilization)

    report = LoadReport(
        configuration=config.name,
        per_process={
            p.id: ProcessLoad(msgs[p.id], cost[p.id], activations[p.id])
            for p in processes
        },
        per_connector=per_connector,
        per_node=per_node,
        per_link=per_link,
        total_msgs_per_sec=total,
        diagnostics=tuple(sort_diagnostics(found)),
    )
    logger.info(
        "load_estimated",
        model=model.name,
        configuration=config.name,
        total_msgs_per_sec=total,
    )
    return report


def _sig(value: float) -> float:
    return float(f"{value:.6g}")


def report_to_record(report: LoadReport) -> LoadReportRecord:
    return {
        "configuration": report.configuration,
        "per_process": {
            pid: {
                "msgs_per_sec": _sig(load.msgs_per_sec),
                "cost_per_sec": _sig(load.cost_per_sec),
                "activations_per_sec": _sig(load.activations_per_sec),
            }
            for pid, load in report.per_process.items()
        },
        "per_connector": {k: _sig(v) for k, v in report.per_connector.items()},
        "per_node": {
            nid: {
                "cost_per_sec": _sig(load.cost_per_sec),
                "utilization": None
                if load.utilization is None
                else _sig(load.utilization),
            }
            for nid, load in report.per_node.items()
        },
        "per_link": {k: _sig(v) for k, v in report.per_link.items()},
        "total_msgs_per_sec": _sig(report.total_msgs_per_sec),
        "diagnostics": [d.to_record() for d in report.diagnostics],
    }


def report_to_json(report: LoadReport) -> str:
    """Stable JSON: sorted keys, 6 significant digits"""
    return json.dumps(report_to_record(report), sort_keys=True, indent=2) + "\n"


def report_to_table(report: LoadReport) -> str:
    buffer = io.StringIO()
    console = Console(file=buffer, color_system=None, force_terminal=False, width=100)

    processes = Table(title=f"Processes ({report.configuration})", box=box.SIMPLE)
    processes.add_column("process")
    for column in ("msgs/s", "cost/s", "activations/s"):
        processes.add_column(column, justify="right")
    for pid in sorted(report.per_process):
        load = report.per_process[pid]
        processes.add_row(
            pid,
            f"{load.msgs_per_sec:.6g}",
            f"{load.cost_per_sec:.6g}",
            f"{load.activations_per_sec:.6g}",
        )
    console.print(processes)

    nodes = Table(title="Nodes", box=box.SIMPLE)
    nodes.add_column("node")
    nodes.add_column("cost/s", justify="right")
    nodes.add_column("utilization", justify="right")
    for nid in sorted(report.per_node):
        load = report.per_node[nid]
        utilization = "-" if load.utilization is None else f"{load.utilization:.6g}"
        nodes.add_row(nid, f"{load.cost_per_sec:.6g}", utilization)
    console.print(nodes)

    for title, rates in (("Connectors", report.per_connector), ("Links", report.per_link)):
        if not rates:
            continue
        table = Table(title=title, box=box.SIMPLE)
        table.add_column(title.lower()[:-1])
        table.add_column("msgs/s", justify="right")
        for label in sorted(rates):
            table.add_row(label, f"{rates[label]:.6g}")
        console.print(table)

    console.print(f"total messages/sec: {report.total_msgs_per_sec:.6g}")
    for diagnostic in report.diagnostics:
        console.print(diagnostic.format(), markup=False, highlight=False)
    return buffer.getvalue()
