#!/usr/bin/env python3
"""
Test suite for architecture_parser.py
"""

import dataclasses
from pathlib import Path

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from architecture_model import (
    ArchitectureModel,
    Autonomy,
    Class,
    ClassCategory,
    LogicalView,
    TaskKind,
    resolve,
)
from architecture_parser import (
    ArchitectureLexer,
    format_architecture,
    parse,
    parse_file,
    quote,
)
from diagnostics import SourceSpan
from tests.model_factory import random_model

SEMI_ACTIVE = """architecture m {
  logical {
    category c {
      class a {
        autonomy semi-active
      }
    }
  }
}
"""


def _rules(result):
    return [d.rule for d in result.diagnostics]


class TestParse:
    def test_pabx_shape(self, pabx_model):
        logical = pabx_model.logical
        assert len(logical.classes) == 6
        assert [c.id for c in logical.categories] == ["telephony"]
        controller = pabx_model.process.process_by_id["controller_process"]
        assert [t.id for t in controller.tasks] == [
            "high_cycle",
            "low_cycle",
            "main_controller",
        ]
        tasks = pabx_model.process.task_by_id
        assert tasks["low_cycle"].period_ms == 200.0
        assert tasks["high_cycle"].period_ms == 10.0
        assert tasks["low_cycle"].kind is TaskKind.MINOR
        assert tasks["main_controller"].kind is TaskKind.MAJOR
        assert tasks["main_controller"].period_ms is None

    def test_spans_attached(self, pabx_model):
        controller = pabx_model.logical.class_by_id["controller"]
        assert controller.span == SourceSpan("pabx.arch", 8, 7)
        assert pabx_model.span == SourceSpan("pabx.arch", 2, 1)

    def test_nested_classes_join_category(self, pabx_model):
        category = pabx_model.logical.category_by_id["telephony"]
        assert len(category.members) == 6
        assert all(c.category == "telephony" for c in pabx_model.logical.classes)

    def test_defaults(self, flight_model):
        clearance = flight_model.logical.class_by_id["clearance"]
        assert clearance.est_cost == 1.0
        assert clearance.name == "Clearance"
        assert not clearance.distributed

    def test_empty_document(self):
        result = parse("")
        assert not result.ok
        assert result.model is None
        assert len(result.diagnostics) == 1
        diagnostic = result.diagnostics[0]
        assert diagnostic.rule == "E_PARSE"
        assert diagnostic.message == "expected 'architecture' block"
        assert (diagnostic.location.line, diagnostic.location.column) == (1, 1)

    def test_unknown_enum_value(self):
        result = parse(SEMI_ACTIVE, "m.arch")
        assert _rules(result) == ["E_ENUM"]
        assert result.diagnostics[0].location == SourceSpan("m.arch", 5, 18)
        assert "unknown autonomy 'semi-active'" in result.diagnostics[0].message

    def test_unknown_enum_value_after_colon(self):
        result = parse(SEMI_ACTIVE.replace("autonomy ", "autonomy: "), "m.arch")
        assert _rules(result) == ["E_ENUM"]
        assert result.diagnostics[0].location == SourceSpan("m.arch", 5, 19)

    def test_colon_after_field_keyword(self):
        text = SEMI_ACTIVE.replace(
            "autonomy semi-active", "autonomy: active\n        cost: 2"
        )
        result = parse(text)
        assert result.ok
        cls = result.model.logical.class_by_id["a"]
        assert cls.autonomy is Autonomy.ACTIVE
        assert cls.est_cost == 2.0

    def test_duplicate_class(self):
        text = """architecture m {
  logical {
    category c {
      class a {
      }
      class a {
      }
    }
  }
}
"""
        result = parse(text)
        assert _rules(result) == ["E_DUP"]
        assert result.diagnostics[0].location.line == 6

    def test_bad_identifier(self):
        result = parse('architecture Model {\n  logical {\n  }\n}\n')
        assert _rules(result) == ["E_PARSE"]
        assert "must match" in result.diagnostics[0].message

    def test_unterminated_string(self):
        result = parse('architecture m {\n  rationale "never closed\n}\n')
        assert not result.ok
        assert any(d.message == "unterminated string literal" for d in result.diagnostics)

    def test_missing_brace(self):
        result = parse("architecture m {\n  logical {\n  }\n")
        assert _rules(result) == ["E_PARSE"]
        assert result.diagnostics[0].message == "expected '}', found end of input"

    def test_second_architecture_block(self):
        result = parse("architecture a {\n}\narchitecture b {\n}\n")
        assert result.diagnostics[0].message == (
            "only one architecture block is allowed per file"
        )
        assert result.diagnostics[0].location.line == 3

    def test_unknown_statement(self):
        result = parse("architecture m {\n  logical {\n    widget x\n  }\n}\n")
        assert result.diagnostics[0].message == "unexpected 'widget' in logical view"

    def test_diagnostics_point_inside_document(self):
        for text in (SEMI_ACTIVE, "architecture m {", "architecture m { logical { class } }"):
            lines = text.count("\n") + 1
            for diagnostic in parse(text).diagnostics:
                assert 1 <= diagnostic.location.line <= lines
                assert diagnostic.location.column >= 1

    def test_crlf_accepted(self, pabx_text, pabx_model):
        result = parse(pabx_text.replace("\n", "\r\n"), "pabx.arch")
        assert result.ok
        assert result.model == pabx_model

    def test_comments_ignored(self):
        result = parse("# header\narchitecture m { # trailing\n  logical {\n  }\n}\n")
        assert result.ok
        assert result.model.logical == LogicalView()

    def test_lexer_escapes(self):
        tokens = list(ArchitectureLexer(r'"a\"b\\c\nd"').tokens())
        assert tokens[0].kind == "STRING"
        assert tokens[0].value == 'a"b\\c\nd'
        assert tokens[-1].kind == "EOF"


class TestParseFile:
    def test_reads_utf8(self, fixture_path):
        result = parse_file(fixture_path("pabx.arch"))
        assert result.ok
        assert result.model.name == "pabx"

    def test_rejects_non_utf8(self, temp_dir):
        path = Path(temp_dir) / "broken.arch"
        path.write_bytes(b"architecture m {\n  rationale \"\xff\xfe\"\n}\n")
        result = parse_file(path)
        assert _rules(result) == ["E_PARSE"]
        assert result.diagnostics[0].message.startswith("document is not UTF-8")

    def test_missing_file_raises(self, temp_dir):
        with pytest.raises(OSError):
            parse_file(Path(temp_dir) / "absent.arch")


class TestFormat:
    @pytest.mark.parametrize("name", ["pabx.arch", "atc.arch", "flight_mapping.arch"])
    def test_fixture_round_trip(self, name):
        from tests.conftest import load_fixture

        model = load_fixture(name)
        again = parse(format_architecture(model))
        assert again.ok, [d.format() for d in again.diagnostics]
        assert again.model == model

    def test_sorted_by_id(self):
        logical = LogicalView(
            categories=(ClassCategory("c", "C", ("zeta", "alpha")),),
            classes=(Class("zeta", category="c"), Class("alpha", category="c")),
        )
        text = format_architecture(ArchitectureModel("m", logical=logical))
        assert text.index("class alpha") < text.index("class zeta")

    def test_layers_in_order(self, atc_model):
        lines = [
            line.strip()
            for line in format_architecture(atc_model).splitlines()
            if line.strip().startswith("layer ")
        ]
        assert [int(line.split()[1]) for line in lines] == [1, 2, 3, 4, 5]

    def test_section_order(self, pabx_model):
        text = format_architecture(pabx_model)
        positions = [
            text.index(f"\n  {word}")
            for word in (
                "logical",
                "process",
                "development",
                "physical",
                "scenarios",
                "map l2p",
                "map l2d",
            )
        ]
        assert positions == sorted(positions)

    def test_canonical_text(self, pabx_model):
        text = format_architecture(pabx_model)
        assert text.endswith("}\n")
        assert "\r" not in text
        assert "\t" not in text
        assert format_architecture(parse(text).model) == text

    def test_member_line_for_foreign_class(self):
        logical = LogicalView(
            categories=(ClassCategory("a", "A", ("x",)), ClassCategory("b", "B", ("x",))),
            classes=(Class("x", category="a"),),
        )
        model = ArchitectureModel("m", logical=logical)
        text = format_architecture(model)
        assert "member x" in text
        assert parse(text).model == model

    def test_quote(self):
        assert quote('a"b\\c\nd\te') == '"a\\"b\\\\c\\nd\\te"'


class TestRoundTripProperty:
    @pytest.mark.property
    @settings(max_examples=500, derandomize=True, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_parse_format_round_trip(self, seed):
        model = random_model(seed, full=False)
        assert resolve(model) == []
        text = format_architecture(model)
        result = parse(text)
        assert result.ok, [d.format() for d in result.diagnostics]
        assert result.model == model
        assert format_architecture(result.model) == text

    def test_spans_do_not_affect_round_trip(self, pabx_model):
        shifted = dataclasses.replace(pabx_model, span=SourceSpan("elsewhere", 99, 1))
        assert parse(format_architecture(shifted)).model == pabx_model
