"""Verdicts and result documents: XML emission, parsing, HTML rendering.

The document model stores every number as its formatted string, so a
document written, parsed, and written again is byte-identical.  Numeric
formatting happens once, when live results are converted to sections.

The verdict rule is two-tailed over the confidence value c: for c < 0.5
a p-value below c fails (left tail); for c >= 0.5 a p-value above c
fails (right tail).  A run at levels 0.05 and 0.95 therefore rejects
both suspiciously bad and suspiciously good fits.
"""

from __future__ import annotations

import html as _html
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence
from xml.etree import ElementTree
from xml.sax.saxutils import escape as _xml_escape

from .errors import ConfigurationError, ReportParseError
from .stats import KsStatisticResult, MetaStatisticResult, StatKind


class Verdict(Enum):
    PASSED = "PASSED"
    FAILED = "FAILED"


def verdict(p: float, level: float) -> Verdict:
    """Judge a p-value at one confidence level (two-tail rule above)."""
    if not (0.0 <= p <= 1.0):
        raise ConfigurationError(f"p-value {p} outside [0, 1]")
    if not (0.0 < level < 1.0):
        raise ConfigurationError(f"confidence level {level} outside (0, 1)")
    if level < 0.5:
        return Verdict.FAILED if p < level else Verdict.PASSED
    return Verdict.FAILED if p > level else Verdict.PASSED


def format_number(value) -> str:
    """Locale-independent text for attribute values; floats get up to 6
    significant digits."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "%.6g" % value
    return str(value)


# ---------------------------------------------------------------------------
# document model (all strings)


@dataclass(frozen=True)
class AnalysisSection:
    """One statistic element: its tag, ordered attributes, and verdict
    children as (PASSED|FAILED, level) pairs."""

    element: str
    attributes: tuple
    verdicts: tuple = ()


@dataclass(frozen=True)
class TestSection:
    name: str
    parameters: tuple = ()
    analyses: tuple = ()
    aborted: Optional[str] = None
    diagnostics: tuple = ()


@dataclass(frozen=True)
class SeedSection:
    seed: str
    tests: tuple = ()


@dataclass(frozen=True)
class RngSection:
    name: str
    warmup: str
    seeds: tuple = ()


@dataclass(frozen=True)
class ReportDocument:
    date: str
    generators: tuple = ()


_STATISTIC_ELEMENTS = ("CHI_SQUARE", "KS", "GAUSSIAN", "META")


def _probability_attrs(p_values: dict) -> list:
    if len(p_values) == 1 and "p" in p_values:
        return [("probability", format_number(p_values["p"]))]
    return [
        (f"probability_{name}", format_number(p))
        for name, p in p_values.items()
    ]


def analysis_from_result(result, verdict_map=None,
                         levels: Sequence[float] = ()) -> AnalysisSection:
    """Convert one statistic result (duck-typed; see stats module) plus
    its per-level verdicts into a section."""
    if isinstance(result, MetaStatisticResult):
        element = "META"
        attrs = [("kind", result.meta_kind)]
        attrs += _probability_attrs(result.p_values)
    elif isinstance(result, KsStatisticResult):
        element = "KS"
        attrs = [
            ("kplus", format_number(result.k_plus)),
            ("kminus", format_number(result.k_minus)),
            ("probability_plus", format_number(result.p_values["plus"])),
            ("probability_minus", format_number(result.p_values["minus"])),
        ]
    elif result.kind is StatKind.CHI_SQUARE:
        element = "CHI_SQUARE"
        attrs = [
            ("chi2", format_number(result.statistic_value)),
            ("probability", format_number(result.p_values["p"])),
            ("dof", format_number(result.dof)),
        ]
    else:
        element = "GAUSSIAN"
        attrs = [("value", format_number(result.statistic_value))]
        attrs += _probability_attrs(result.p_values)
    verdicts = []
    if verdict_map is not None:
        for level in levels:
            verdicts.append((verdict_map[level].value, format_number(level)))
    return AnalysisSection(element=element, attributes=tuple(attrs),
                           verdicts=tuple(verdicts))


def test_section_from_outcome(outcome, levels: Sequence[float]) -> TestSection:
    """Convert a battery TestOutcome (duck-typed: test_name, parameters,
    results, verdicts, aborted, diagnostics) into a section."""
    parameters = tuple(
        (name, format_number(value)) for name, value in outcome.parameters
    )
    analyses = []
    if outcome.aborted is None:
        for result, vmap in zip(outcome.results, outcome.verdicts):
            analyses.append(analysis_from_result(result, vmap, levels))
    diagnostics = tuple(
        (name, format_number(value))
        for name, value in getattr(outcome, "diagnostics", ())
    )
    return TestSection(
        name=outcome.test_name,
        parameters=parameters,
        analyses=tuple(analyses),
        aborted=outcome.aborted,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# XML emission


def _attr(value: str) -> str:
    return '"%s"' % _xml_escape(value, {'"': "&quot;"})


class _Writer:
    def __init__(self):
        self.lines = []

    def element(self, depth: int, tag: str, attrs, children=None):
        pad = "  " * depth
        head = tag + "".join(
            f" {name}={_attr(str(value))}" for name, value in attrs
        )
        if children:
            self.lines.append(f"{pad}<{head}>")
            for child in children:
                child()
            self.lines.append(f"{pad}</{tag}>")
        else:
            self.lines.append(f"{pad}<{head}/>")


def _emit_test(w: _Writer, depth: int, test: TestSection) -> None:
    children = []

    def params():
        w.element(depth + 1, "PARAMETERS", [], [
            (lambda nv=nv: w.element(depth + 2, "PARAMETER",
                                     [("name", nv[0]), ("value", nv[1])]))
            for nv in test.parameters
        ] or None)

    children.append(params)
    if test.aborted is not None:
        children.append(lambda: w.element(
            depth + 1, "ABORTED", [("reason", test.aborted)]))
    for analysis in test.analyses:
        def emit_analysis(analysis=analysis):
            def stat():
                w.element(depth + 2, analysis.element,
                          list(analysis.attributes), [
                              (lambda v=v: w.element(
                                  depth + 3, v[0],
                                  [("confidenceLevel", v[1])]))
                              for v in analysis.verdicts
                          ] or None)
            w.element(depth + 1, "ANALYZE", [], [stat])
        children.append(emit_analysis)
    if test.diagnostics:
        children.append(lambda: w.element(
            depth + 1, "DIAGNOSTICS", [], [
                (lambda nv=nv: w.element(depth + 2, "DIAGNOSTIC",
                                         [("name", nv[0]),
                                          ("value", nv[1])]))
                for nv in test.diagnostics
            ]))
    w.element(depth, "TEST", [("name", test.name)], children)


def xml_lines(doc: ReportDocument,
              stylesheet_href: Optional[str] = None) -> list:
    w = _Writer()
    w.lines.append('<?xml version="1.0" ?>')
    if stylesheet_href is not None:
        w.lines.append(
            f'<?xml-stylesheet href="{stylesheet_href}" type="text/xsl"?>'
        )

    def rng(section: RngSection):
        def seed(seed_section: SeedSection):
            w.element(2, "SEED", [("seed", seed_section.seed)], [
                (lambda t=t: _emit_test(w, 3, t))
                for t in seed_section.tests
            ] or None)
        w.element(1, "RNG",
                  [("name", section.name), ("warmup", section.warmup)],
                  [(lambda s=s: seed(s)) for s in section.seeds] or None)

    w.element(0, "RNG_TEST_SUITE_RESULT", [("date", doc.date)],
              [(lambda g=g: rng(g)) for g in doc.generators] or None)
    return w.lines


def write_xml(doc: ReportDocument, destination,
              stylesheet_href: Optional[str] = None) -> None:
    """Serialize to a byte sink (binary file object or path)."""
    data = ("\n".join(xml_lines(doc, stylesheet_href)) + "\n").encode("utf-8")
    if isinstance(destination, (str, Path)):
        with open(destination, "wb") as fp:
            fp.write(data)
    else:
        destination.write(data)


# ---------------------------------------------------------------------------
# XML parsing (strict inverse)


def _require(element, attr: str) -> str:
    value = element.get(attr)
    if value is None:
        raise ReportParseError(
            f"element {element.tag} lacks required attribute {attr!r}"
        )
    return value


def _no_extra_children(element, allowed) -> None:
    for child in element:
        if child.tag not in allowed:
            raise ReportParseError(
                f"unexpected element {child.tag} inside {element.tag}"
            )


def _parse_name_values(element, child_tag: str) -> tuple:
    _no_extra_children(element, {child_tag})
    return tuple(
        (_require(child, "name"), _require(child, "value"))
        for child in element
    )


def _parse_analysis(element) -> AnalysisSection:
    stats = list(element)
    if len(stats) != 1:
        raise ReportParseError(
            "ANALYZE must contain exactly one statistic element"
        )
    stat = stats[0]
    if stat.tag not in _STATISTIC_ELEMENTS:
        raise ReportParseError(
            f"unknown statistic element {stat.tag} inside ANALYZE"
        )
    verdicts = []
    for child in stat:
        if child.tag not in ("PASSED", "FAILED"):
            raise ReportParseError(
                f"unexpected element {child.tag} inside {stat.tag}"
            )
        verdicts.append((child.tag, _require(child, "confidenceLevel")))
    return AnalysisSection(
        element=stat.tag,
        attributes=tuple(stat.attrib.items()),
        verdicts=tuple(verdicts),
    )


def _parse_test(element) -> TestSection:
    _no_extra_children(
        element, {"PARAMETERS", "ANALYZE", "ABORTED", "DIAGNOSTICS"}
    )
    parameters = ()
    analyses = []
    aborted = None
    diagnostics = ()
    for child in element:
        if child.tag == "PARAMETERS":
            parameters = _parse_name_values(child, "PARAMETER")
        elif child.tag == "ANALYZE":
            analyses.append(_parse_analysis(child))
        elif child.tag == "ABORTED":
            aborted = _require(child, "reason")
        else:
            diagnostics = _parse_name_values(child, "DIAGNOSTIC")
    return TestSection(
        name=_require(element, "name"),
        parameters=parameters,
        analyses=tuple(analyses),
        aborted=aborted,
        diagnostics=diagnostics,
    )


def parse_xml(source) -> ReportDocument:
    """Parse a document produced by write_xml; strict about shape."""
    try:
        tree = ElementTree.parse(source)
    except ElementTree.ParseError as exc:
        raise ReportParseError(f"not well-formed XML: {exc}") from None
    root = tree.getroot()
    if root.tag != "RNG_TEST_SUITE_RESULT":
        raise ReportParseError(
            f"root element is {root.tag}, expected RNG_TEST_SUITE_RESULT"
        )
    generators = []
    _no_extra_children(root, {"RNG"})
    for rng in root:
        seeds = []
        _no_extra_children(rng, {"SEED"})
        for seed in rng:
            _no_extra_children(seed, {"TEST"})
            tests = tuple(_parse_test(t) for t in seed)
            seeds.append(SeedSection(seed=_require(seed, "seed"),
                                     tests=tests))
        generators.append(RngSection(
            name=_require(rng, "name"),
            warmup=_require(rng, "warmup"),
            seeds=tuple(seeds),
        ))
    return ReportDocument(date=_require(root, "date"),
                          generators=tuple(generators))


# ---------------------------------------------------------------------------
# HTML rendering


_HTML_STYLE = """\
body { font-family: sans-serif; margin: 2em; }
table { border-collapse: collapse; margin-bottom: 2em; }
th, td { border: 1px solid #999; padding: 4px 10px; text-align: left; }
th { background: #eee; }
td.pass { background: #bfa; }
td.fail { background: #fba; }
td.aborted { background: #ffd27f; font-style: italic; }
"""


def _esc(text: str) -> str:
    return _html.escape(str(text), quote=True)


def _analysis_cells(analysis: AnalysisSection) -> tuple[str, str, list]:
    stat_bits = ", ".join(
        f"{name}={value}" for name, value in analysis.attributes
        if not name.startswith("probability")
    )
    p_bits = ", ".join(
        f"{name.replace('probability', 'p').replace('p_', 'p ')}={value}"
        for name, value in analysis.attributes
        if name.startswith("probability")
    )
    cells = []
    for kind, level in analysis.verdicts:
        css = "pass" if kind == "PASSED" else "fail"
        cells.append(
            f'<td class="{css}">{_esc(level)}: {_esc(kind)}</td>'
        )
    return f"{_esc(analysis.element)} ({_esc(stat_bits)})", _esc(p_bits), cells


def render_html(doc: ReportDocument, destination) -> None:
    """Emit a standalone page: one table per generator and seed."""
    passed = failed = aborted = 0
    for rng in doc.generators:
        for seed in rng.seeds:
            for test in seed.tests:
                if test.aborted is not None:
                    aborted += 1
                for analysis in test.analyses:
                    for kind, _ in analysis.verdicts:
                        if kind == "PASSED":
                            passed += 1
                        else:
                            failed += 1
    lines = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8"/>',
        "<title>Random number test suite results</title>",
        f"<style>{_HTML_STYLE}</style>",
        "</head>",
        "<body>",
        "<h1>Random number test suite results</h1>",
        f"<p>Date: {_esc(doc.date)}</p>",
        f"<p>Verdicts: {passed} passed, {failed} failed; "
        f"{aborted} aborted tests.</p>",
    ]
    for rng in doc.generators:
        for seed in rng.seeds:
            lines.append(
                f"<h2>{_esc(rng.name)} (warmup {_esc(rng.warmup)}), "
                f"seed {_esc(seed.seed)}</h2>"
            )
            lines.append("<table>")
            lines.append(
                "<tr><th>Test</th><th>Statistic</th>"
                "<th>p-values</th><th>Verdicts</th></tr>"
            )
            for test in seed.tests:
                if test.aborted is not None:
                    lines.append(
                        f"<tr><td>{_esc(test.name)}</td>"
                        f'<td class="aborted" colspan="3">aborted: '
                        f"{_esc(test.aborted)}</td></tr>"
                    )
                for i, analysis in enumerate(test.analyses):
                    stat, ps, cells = _analysis_cells(analysis)
                    label = test.name if i == 0 else f"{test.name} (cont.)"
                    lines.append(
                        f"<tr><td>{_esc(label)}</td><td>{stat}</td>"
                        f"<td>{ps}</td><td>{''.join(cells) or '-'}"
                        "</td></tr>"
                    )
            lines.append("</table>")
    lines += ["</body>", "</html>"]
    data = ("\n".join(lines) + "\n").encode("utf-8")
    if isinstance(destination, (str, Path)):
        with open(destination, "wb") as fp:
            fp.write(data)
    else:
        destination.write(data)
