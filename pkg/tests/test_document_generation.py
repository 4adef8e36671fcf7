#!/usr/bin/env python3
"""
Test suite for document_generation.py
"""

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from architecture_model import ViewKind, view_presence
from consistency_checker import check
from diagnostics import make_diagnostic
from document_generation import OMITTED, SAD_OUTLINE, generate
from load_estimation import estimate
from tests.model_factory import random_model


OUTLINE = [
    "Title Page",
    "Change History",
    "Table of Contents",
    "List of Figures",
    "1. Scope",
    "2. References",
    "3. Software Architecture",
    "4. Architectural Goals & Constraints",
    "5. Logical Architecture",
    "6. Process Architecture",
    "7. Development Architecture",
    "8. Physical Architecture",
    "9. Scenarios",
    "10. Size and Performance",
    "11. Quality",
    "Appendices",
    "A. Acronyms and Abbreviations",
    "B. Definitions",
    "C. Design Principles",
]


def _headings(document):
    return [line for line in document.splitlines() if line.startswith("#")]


def _outline(document):
    return [heading.lstrip("# ") for heading in _headings(document)]


def _section(document, heading):
    start = document.index(heading + "\n")
    following = SAD_OUTLINE[SAD_OUTLINE.index(heading) + 1]
    return document[start + len(heading) : document.index(following + "\n", start)]


class TestOutline:
    def test_golden_heading_order(self, pabx_model):
        headings = _headings(generate(pabx_model))
        assert [h.lstrip("# ") for h in headings] == OUTLINE
        assert [h.split(" ")[0] for h in headings] == (
            ["#"] + ["##"] * 15 + ["###"] * 3
        )

    def test_title_and_contents(self, pabx_model):
        document = generate(pabx_model)
        assert document.startswith("# Title Page\n\n**pabx**: Software Architecture Document")
        contents = _section(document, "## Table of Contents")
        assert "- 5. Logical Architecture" in contents
        assert "- C. Design Principles" in contents

    def test_figures_listed(self, pabx_model):
        figures = _section(generate(pabx_model), "## List of Figures")
        assert "- Figure 1: Logical blueprint" in figures
        assert "- Figure 5: Scenario blueprint: off_hook" in figures

    def test_deterministic(self, pabx_model):
        report = estimate(pabx_model, "small")
        assert generate(pabx_model, report) == generate(pabx_model, report)
        assert generate(pabx_model).endswith("\n")
        assert not generate(pabx_model).endswith("\n\n")


class TestViewSections:
    def test_every_element_named(self, pabx_model):
        document = generate(pabx_model)
        ids = (
            [c.id for c in pabx_model.logical.classes]
            + list(pabx_model.process.task_by_id)
            + [s.id for s in pabx_model.development.subsystems]
            + [n.id for n in pabx_model.physical.nodes]
            + [s.id for s in pabx_model.scenarios.scenarios]
        )
        for ident in ids:
            assert ident in document

    def test_blueprints_embedded(self, pabx_model):
        document = generate(pabx_model)
        assert document.count("```dot") == 5
        assert "digraph development {" in document

    def test_tailored_views_omitted(self, atc_model):
        document = generate(atc_model)
        assert document.count(OMITTED) == 3
        for heading in (
            "## 6. Process Architecture",
            "## 8. Physical Architecture",
            "## 9. Scenarios",
        ):
            assert OMITTED in _section(document, heading)
        assert _outline(document) == OUTLINE

    def test_rationales_as_constraints(self, pabx_model):
        goals = _section(generate(pabx_model), "## 4. Architectural Goals & Constraints")
        assert (
            "- **architecture**: Hard real-time line handling is isolated in the "
            "controller process" in goals
        )


class TestSizeAndQuality:
    def test_without_report(self, pabx_model):
        section = _section(generate(pabx_model), "## 10. Size and Performance")
        assert "No load estimate supplied." in section

    def test_with_report(self, pabx_model):
        report = estimate(pabx_model, "small")
        section = _section(generate(pabx_model, report), "## 10. Size and Performance")
        assert "Load estimate for configuration `small`." in section
        assert "| controller_process | 2 | 107 | 105 |" in section
        assert "Total: 6 messages/sec." in section

    def test_quality_lists_findings(self, atc_model):
        findings = check(atc_model)
        assert [d.rule for d in findings] == ["T001"] * 3
        section = _section(generate(atc_model, diagnostics=findings), "## 11. Quality")
        for diagnostic in findings:
            assert f"- `{diagnostic.format()}`" in section

    def test_quality_skips_errors(self, pabx_model):
        error = make_diagnostic("D001", "upward dependency")
        section = _section(
            generate(pabx_model, diagnostics=[error]), "## 11. Quality"
        )
        assert "No warnings or informational findings." in section
        assert "D001" not in section


class TestDocumentProperties:
    @pytest.mark.property
    @settings(max_examples=200, derandomize=True, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_outline_and_omissions(self, seed):
        model = random_model(seed, full=False)
        document = generate(model)
        assert _outline(document) == OUTLINE
        assert document.count(OMITTED) == len(ViewKind) - len(view_presence(model))
        for cls in model.logical.classes:
            assert f"| {cls.id} |" in document
