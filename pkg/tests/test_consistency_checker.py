#!/usr/bin/env python3
"""
Test suite for consistency_checker.py
Rule catalog, check options and scenario tracing
"""

import dataclasses
import re

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from pydantic import ValidationError

from architecture_model import (
    Class,
    Connector,
    ConnectorKind,
    Configuration,
    DevDependency,
    L2PEntry,
    LayerDef,
    Placement,
    Scenario,
    ScenarioView,
    Step,
    Task,
    TaskKind,
    resolve,
)
from architecture_parser import parse
from consistency_checker import (
    UNMAPPED,
    CheckMode,
    CheckOptions,
    Crossing,
    check,
    trace,
)
from diagnostics import Severity, UnknownScenarioError, make_diagnostic, sort_diagnostics
from tests.model_factory import random_model, upward_dependencies

D_RULES = {"D001", "D002", "D003", "D004", "M004"}


def _rules(diagnostics):
    return [d.rule for d in diagnostics]


def _non_info(diagnostics):
    return [d for d in diagnostics if d.severity is not Severity.INFO]


def _replace_view(model, name, **changes):
    return dataclasses.replace(
        model, **{name: dataclasses.replace(getattr(model, name), **changes)}
    )


def _add_connector(model, connector):
    return _replace_view(
        model, "process", connectors=model.process.connectors + (connector,)
    )


def _set_l2p(model, class_id, tasks):
    entries = [e for e in model.l2p if e.class_id != class_id]
    if tasks:
        entries.append(L2PEntry(class_id, tuple(tasks)))
    return dataclasses.replace(model, l2p=tuple(entries))


def _with_scenario(model, *steps):
    scenario = Scenario("extra", "Extra", 1.0, tuple(steps))
    return dataclasses.replace(
        model, scenarios=ScenarioView(model.scenarios.scenarios + (scenario,))
    )


class TestFixtures:
    def test_pabx_is_clean_in_strict_mode(self, pabx_model):
        assert check(pabx_model) == []

    def test_atc_reports_only_absent_views(self, atc_model):
        found = check(atc_model)
        assert _rules(found) == ["T001", "T001", "T001"]
        assert sorted(d.message.split()[0] for d in found) == [
            "physical",
            "process",
            "scenarios",
        ]
        assert all(d.severity is Severity.INFO for d in found)


class TestDevelopmentRules:
    def test_injected_upward_dependency(self, atc_text):
        text = atc_text.replace(
            "    depends gateways -> communications\n",
            "    depends gateways -> communications\n"
            "    depends common_utilities -> hmi\n",
        )
        model = parse(text, "atc.arch").model
        found = _non_info(check(model))
        assert _rules(found) == ["D001"]
        assert found[0].format() == (
            "atc.arch:148:5: error D001: subsystem 'common_utilities' (layer 2) "
            "depends on 'hmi' in higher layer 5"
        )

    def test_three_layers(self, atc_model):
        development = atc_model.development
        model = _replace_view(
            atc_model,
            "development",
            layers=tuple(layer for layer in development.layers if layer.number <= 3),
            subsystems=tuple(
                dataclasses.replace(s, layer=min(s.layer, 3))
                for s in development.subsystems
            ),
        )
        assert resolve(model) == []
        found = _non_info(check(model))
        assert _rules(found) == ["D002"]
        assert found[0].severity is Severity.WARNING

    def test_subsystem_size(self, atc_model):
        development = atc_model.development
        model = _replace_view(
            atc_model,
            "development",
            subsystems=tuple(
                dataclasses.replace(s, ksloc=25.0) if s.id == "hmi" else s
                for s in development.subsystems
            ),
        )
        found = _non_info(check(model))
        assert _rules(found) == ["D003"]
        assert "'hmi' is 25 KSLOC" in found[0].message

    def test_same_layer_cycle(self, atc_model):
        development = atc_model.development
        model = _replace_view(
            atc_model,
            "development",
            dependencies=development.dependencies
            + (DevDependency("atc_classes", "framework"),),
        )
        found = [d for d in check(model) if d.rule == "D004"]
        assert len(found) == 1
        assert "atc_classes, framework" in found[0].message
        assert found[0].severity is Severity.INFO


class TestProcessRules:
    def test_shared_memory_across_processes(self, pabx_model):
        model = _add_connector(
            pabx_model,
            Connector(ConnectorKind.SHARED_MEMORY, "main_controller", "service_handler"),
        )
        found = check(model)
        assert _rules(found) == ["P001"]
        assert "process 'controller_process'" in found[0].message

    def test_shared_memory_inside_process_is_fine(self, pabx_model):
        kinds = {c.kind for c in pabx_model.process.connectors}
        assert ConnectorKind.SHARED_MEMORY in kinds
        assert not [d for d in check(pabx_model) if d.rule == "P001"]

    def test_major_task_on_shared_memory_only(self, pabx_model):
        controller = pabx_model.process.process_by_id["controller_process"]
        grown = dataclasses.replace(
            controller, tasks=controller.tasks + (Task("watchdog", kind=TaskKind.MAJOR),)
        )
        model = _replace_view(
            pabx_model,
            "process",
            processes=tuple(
                grown if p.id == "controller_process" else p
                for p in pabx_model.process.processes
            ),
            connectors=pabx_model.process.connectors
            + (Connector(ConnectorKind.SHARED_MEMORY, "watchdog", "high_cycle"),),
        )
        found = check(model)
        assert _rules(found) == ["P002"]
        assert "'watchdog'" in found[0].message


class TestMappingRules:
    def test_unmapped_class(self, pabx_model):
        found = check(_set_l2p(pabx_model, "connection_services", None))
        assert _rules(found) == ["M001"]

    def test_subordinate_outside_master(self, pabx_model):
        logical = _replace_view(
            pabx_model,
            "logical",
            classes=tuple(
                dataclasses.replace(c, subordinate_to="conversation")
                if c.id == "connection_services"
                else c
                for c in pabx_model.logical.classes
            ),
        )
        found = check(logical)
        assert _rules(found) == ["M002"]
        assert "service_handler" in found[0].message

    def test_active_class_without_dedicated_task(self, pabx_model):
        model = _set_l2p(pabx_model, "terminal", ["conversation_handler"])
        found = [d for d in check(model) if d.rule == "M003"]
        assert sorted(re.findall(r"'(\w+)'", d.message)[0] for d in found) == [
            "conversation",
            "terminal",
        ]

    def test_serial_task_counts_as_dedicated(self, pabx_model):
        model = _set_l2p(pabx_model, "terminal", ["conversation_handler"])
        terminal_process = model.process.process_by_id["terminal_process"]
        serial = dataclasses.replace(
            terminal_process,
            tasks=tuple(
                dataclasses.replace(t, serial=True)
                if t.id == "conversation_handler"
                else t
                for t in terminal_process.tasks
            ),
        )
        model = _replace_view(
            model,
            "process",
            processes=tuple(
                serial if p.id == "terminal_process" else p
                for p in model.process.processes
            ),
        )
        assert not [d for d in check(model) if d.rule == "M003"]

    def test_passive_neighbour_removes_dedication(self, pabx_model):
        model = _set_l2p(pabx_model, "numbering_plan", ["terminal_handler"])
        found = [d for d in check(model) if d.rule == "M003"]
        assert [d.message for d in found] == [
            "active class 'terminal' has no dedicated agent task"
        ]

    def test_subordinate_neighbour_keeps_dedication(self, pabx_model):
        logical = _replace_view(
            pabx_model,
            "logical",
            classes=tuple(
                dataclasses.replace(c, subordinate_to="terminal")
                if c.id == "numbering_plan"
                else c
                for c in pabx_model.logical.classes
            ),
        )
        model = _set_l2p(logical, "numbering_plan", ["terminal_handler"])
        assert not [d for d in check(model) if d.rule == "M003"]

    def test_class_without_module(self, pabx_model):
        model = dataclasses.replace(
            pabx_model,
            l2d=tuple(e for e in pabx_model.l2d if e.class_id != "controller"),
        )
        found = check(model)
        assert _rules(found) == ["M004"]


class TestPlacementRule:
    def test_missing_process(self, pabx_model):
        small = pabx_model.physical.configuration_by_name["small"]
        partial = Configuration(
            "small", tuple(p for p in small.placements if p.process != "services")
        )
        model = _replace_view(
            pabx_model,
            "physical",
            configurations=(
                partial,
                pabx_model.physical.configuration_by_name["large"],
            ),
        )
        found = check(model)
        assert _rules(found) == ["PH01"]
        assert "does not place process 'services'" in found[0].message

    def test_wrong_replica_count(self, pabx_model):
        large = pabx_model.physical.configuration_by_name["large"]
        doubled = Configuration(
            "large",
            tuple(
                Placement(p.process, ("c1", "k1")) if p.process == "services" else p
                for p in large.placements
            ),
        )
        model = _replace_view(
            pabx_model,
            "physical",
            configurations=(
                pabx_model.physical.configuration_by_name["small"],
                doubled,
            ),
        )
        found = check(model)
        assert _rules(found) == ["PH01"]
        assert "places 2 replica(s) of 'services', expected 1" in found[0].message


class TestCategoryRule:
    def test_class_without_category(self, pabx_model):
        model = _replace_view(
            pabx_model,
            "logical",
            classes=pabx_model.logical.classes + (Class("orphan", operations=("x",)),),
        )
        found = [d for d in check(model) if d.rule == "L001"]
        assert [d.message for d in found] == [
            "class 'orphan' is not assigned to any category"
        ]

    def test_category_does_not_list_class(self, pabx_model):
        model = _replace_view(
            pabx_model,
            "logical",
            classes=pabx_model.logical.classes
            + (Class("stray", category="telephony", operations=("x",)),),
        )
        found = [d for d in check(model) if d.rule == "L001"]
        assert len(found) == 1
        assert "does not list it" in found[0].message


class TestScenarios:
    def test_pabx_trace(self, pabx_model):
        result, found = trace(pabx_model, "off_hook")
        assert found == []
        assert len(result.hops) == 5
        assert [h.crossing for h in result.hops] == [
            Crossing.CROSS_PROCESS,
            Crossing.CROSS_PROCESS,
            Crossing.CROSS_PROCESS,
            Crossing.SAME_PROCESS,
            Crossing.SAME_PROCESS,
        ]
        first = result.hops[0]
        assert (first.source_task, first.target_task) == (
            "main_controller",
            "terminal_handler",
        )
        assert first.connector.kind is ConnectorKind.MESSAGE
        assert result.hops[3].connector.label == (
            "rpc:terminal_handler->numbering_handler"
        )
        assert result.hops[4].connector.label == (
            "message:terminal_handler->conversation_handler"
        )
        assert len(result.cross_process_hops()) == 3

    def test_unknown_scenario(self, pabx_model):
        with pytest.raises(UnknownScenarioError):
            trace(pabx_model, "on_hook")

    def test_no_scenarios_view(self, atc_model):
        with pytest.raises(UnknownScenarioError):
            trace(atc_model, "off_hook")

    def test_missing_operation(self, pabx_model):
        model = _with_scenario(
            pabx_model, Step(1, "controller", "terminal", "dial")
        )
        found = check(model)
        assert _rules(found) == ["S001"]
        assert "'terminal.dial'" in found[0].message

    def test_missing_class(self, pabx_model):
        model = _with_scenario(pabx_model, Step(1, "controller", "ghost", "dial"))
        _, found = trace(model, "extra")
        assert _rules(found) == ["S001"]
        assert "missing class 'ghost'" in found[0].message

    def test_cross_process_without_connector(self, pabx_model):
        model = _replace_view(
            pabx_model,
            "process",
            connectors=tuple(
                c
                for c in pabx_model.process.connectors
                if c.label != "message:main_controller->terminal_handler"
            ),
        )
        found = [d for d in check(model) if d.rule == "S002"]
        assert len(found) == 3
        result, _ = trace(model, "off_hook")
        assert result.hops[0].connector is None
        assert result.hops[0].crossing is Crossing.CROSS_PROCESS

    def test_hint_falls_back_to_lowest_kind(self, pabx_model):
        model = _with_scenario(
            pabx_model,
            Step(1, "terminal", "conversation", "close", ConnectorKind.RPC),
        )
        result, _ = trace(model, "extra")
        assert result.hops[0].connector.kind is ConnectorKind.MESSAGE

    def test_hint_selects_matching_connector(self, pabx_model):
        model = _add_connector(
            pabx_model,
            Connector(ConnectorKind.RPC, "main_controller", "terminal_handler"),
        )
        model = _with_scenario(
            model,
            Step(1, "controller", "terminal", "wake_up", ConnectorKind.RPC),
            Step(2, "controller", "terminal", "wake_up"),
        )
        result, _ = trace(model, "extra")
        assert result.hops[0].connector.kind is ConnectorKind.RPC
        assert result.hops[1].connector.kind is ConnectorKind.MESSAGE

    def test_unmapped_endpoint(self, pabx_model):
        model = _set_l2p(pabx_model, "terminal", None)
        result, _ = trace(model, "off_hook")
        assert result.hops[0].target_task == UNMAPPED
        assert result.hops[0].crossing is None
        assert not result.hops[0].mapped


class TestOptions:
    def test_sketch_mode_downgrades(self, pabx_model):
        model = _set_l2p(pabx_model, "connection_services", None)
        model = _with_scenario(
            model, Step(1, "controller", "terminal", "dial")
        )
        strict = check(model)
        sketch = check(model, CheckOptions(mode=CheckMode.SKETCH))
        assert sorted(_rules(strict)) == ["M001", "S001"]
        assert all(d.severity is Severity.ERROR for d in strict)
        assert all(d.severity is Severity.WARNING for d in sketch)

    def test_sketch_mode_keeps_other_errors(self, pabx_model):
        model = _add_connector(
            pabx_model,
            Connector(ConnectorKind.SHARED_MEMORY, "main_controller", "service_handler"),
        )
        found = check(model, CheckOptions(mode="sketch"))
        assert found[0].severity is Severity.ERROR

    def test_warnings_as_errors(self, atc_model):
        model = _replace_view(
            atc_model,
            "development",
            layers=atc_model.development.layers + (LayerDef(6, "Extra"), LayerDef(7, "More")),
        )
        plain = _non_info(check(model))
        promoted = _non_info(check(model, CheckOptions(warnings_as_errors=True)))
        assert [d.severity for d in plain] == [Severity.WARNING]
        assert [d.severity for d in promoted] == [Severity.ERROR]
        assert check(model, CheckOptions(warnings_as_errors=True))[0].severity is Severity.INFO

    def test_disabled_rules(self, atc_model):
        found = check(atc_model, CheckOptions(disabled_rules=frozenset({"T001"})))
        assert found == []

    def test_unknown_rule_rejected(self):
        with pytest.raises(ValidationError):
            CheckOptions(disabled_rules=frozenset({"Z999"}))

    def test_options_frozen(self):
        options = CheckOptions()
        with pytest.raises(ValidationError):
            options.mode = CheckMode.SKETCH


class TestProperties:
    def _dirty_pabx(self, pabx_model):
        model = _replace_view(
            pabx_model,
            "development",
            subsystems=tuple(
                dataclasses.replace(s, ksloc=40.0) if s.id == "telephony" else s
                for s in pabx_model.development.subsystems
            ),
            dependencies=pabx_model.development.dependencies
            + (DevDependency("line_interface", "administration"),),
        )
        return _with_scenario(
            model, Step(1, "controller", "terminal", "dial")
        )

    def test_rule_locality(self, pabx_model):
        model = self._dirty_pabx(pabx_model)
        full = check(model)
        assert {"D001", "D003", "S001"} <= set(_rules(full))
        without = check(dataclasses.replace(model, development=None, l2d=()))
        expected = sort_diagnostics(
            [d for d in full if d.rule not in D_RULES]
            + [
                make_diagnostic(
                    "T001",
                    "development view absent; dependent rules skipped",
                    model.span,
                )
            ]
        )
        assert without == expected

    def test_m001_monotonic(self, pabx_model):
        kept = dataclasses.replace(pabx_model, l2p=pabx_model.l2p[:2])
        previous = len([d for d in check(kept) if d.rule == "M001"])
        for entry in pabx_model.l2p[2:]:
            kept = dataclasses.replace(kept, l2p=kept.l2p + (entry,))
            current = len([d for d in check(kept) if d.rule == "M001"])
            assert current <= previous
            previous = current
        assert previous == 0

    @pytest.mark.property
    @settings(max_examples=500, derandomize=True, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_check_is_deterministic(self, seed):
        model = random_model(seed)
        first = check(model)
        assert first == check(model)
        assert not [d for d in first if d.severity is Severity.ERROR]

    @pytest.mark.property
    @settings(max_examples=500, derandomize=True, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_d001_matches_brute_force(self, seed):
        model = random_model(seed, allow_upward=True)
        reported = sorted(
            tuple(re.findall(r"'(\w+)'", d.message))
            for d in check(model)
            if d.rule == "D001"
        )
        assert reported == upward_dependencies(model)
