"""Pydantic models for API request/response validation and the JSON files
read and written by the CLI. Every document carries "schema": "v1"; all
rationals travel as exact fraction strings."""

from fractions import Fraction
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, model_validator

from app.errors import SchemaError
from app.services import aarhus, clasper, freegroup
from app.services.diagrams import ColoredTree, TreeVector, parse_tree

SCHEMA_VERSION = "v1"
Label = Union[int, str]


def frac_str(value) -> str:
    return str(Fraction(value))


def parse_frac(text: Union[str, int]) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{text!r} is not an exact rational") from exc


def _check_frac(text: str) -> str:
    parse_frac(text)
    return text


# an exact rational carried as a string, "p" or "p/q"
Rational = Annotated[str, AfterValidator(_check_frac)]


class Versioned(BaseModel):
    """Base for every top-level document; dump with by_alias=True"""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal["v1"] = Field(SCHEMA_VERSION, alias="schema")


# --- diagrams -------------------------------------------------------------------


class UnivalentVertex(BaseModel):
    v: int
    color: Label


class TreeModel(Versioned):
    """Tree JSON: the graph form, or a `text` shorthand such as
    "((1,2),(1,3),(2,3))" or "1-(2,3)"."""

    colors: Optional[int] = Field(None, description="Number of unlink colors r", examples=[3])
    text: Optional[str] = Field(None, examples=["((1,2),(1,3),(2,3))"])
    trivalent: List[int] = Field(default_factory=list)
    univalent: List[UnivalentVertex] = Field(default_factory=list)
    edges: List[Tuple[int, int]] = Field(default_factory=list)
    cyclic_order: Dict[str, List[int]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_form(self):
        if self.text is None and not self.univalent:
            raise ValueError("a tree needs either `text` or `univalent` and `edges`")
        return self

    def to_tree(self) -> ColoredTree:
        if self.text is not None and not self.univalent:
            tree = parse_tree(self.text)
        else:
            labels = {u.v: u.color for u in self.univalent}
            order = {int(v): ns for v, ns in self.cyclic_order.items()}
            tree = ColoredTree.from_edges(self.edges, labels, order)
            declared = sorted(self.trivalent)
            if declared and declared != sorted(tree.trivalent):
                raise SchemaError(f"declared trivalent vertices {declared} disagree with the edges")
        if self.colors is not None:
            for _, lab in tree.labels:
                if isinstance(lab, int) and not 1 <= lab <= self.colors:
                    raise SchemaError(f"color {lab} outside 1..{self.colors}")
        return tree

    @classmethod
    def from_tree(cls, tree: ColoredTree, colors: Optional[int] = None) -> "TreeModel":
        return cls(
            colors=colors,
            trivalent=tree.trivalent,
            univalent=[UnivalentVertex(v=v, color=lab) for v, lab in tree.labels],
            edges=[tuple(e) for e in tree.edges],
            cyclic_order={str(v): list(ns) for v, ns in tree.adjacency if len(ns) == 3},
            text=tree.to_text(),
        )


class TreeTerm(BaseModel):
    coeff: Rational
    tree: TreeModel


class TreeVectorModel(Versioned):
    terms: List[TreeTerm] = Field(default_factory=list)

    def to_vector(self) -> TreeVector:
        out = TreeVector()
        for term in self.terms:
            out.add_tree(term.tree.to_tree(), parse_frac(term.coeff))
        return out

    @classmethod
    def from_vector(cls, vector: TreeVector) -> "TreeVectorModel":
        return cls(terms=[TreeTerm(coeff=frac_str(c), tree=TreeModel.from_tree(t)) for t, c in vector])


# --- patterns and claspers ----------------------------------------------------------


class PatternModel(Versioned):
    tree: TreeModel
    vertex: Optional[int] = Field(None, description="Trivalent vertex override")
    n: Optional[int] = Field(None, ge=1, description="Validate as an n-pattern")
    edge: Optional[Tuple[int, int]] = Field(None, description="Central edge override for n-patterns")


class PatternReport(Versioned):
    valid: bool
    kind: str
    degree: int
    vertex: Optional[int] = None
    n: Optional[int] = None
    edge: Optional[Tuple[int, int]] = None
    branches: List[str] = Field(default_factory=list)
    tree: TreeModel


class LeafModel(BaseModel):
    word: str
    framing: int = 0


class ClasperSpecModel(Versioned):
    shape: TreeModel
    leaves: List[LeafModel]
    leaf_linking: List[List[int]]
    r: Optional[int] = Field(None, ge=1, description="Free group rank; defaults to the largest generator in the leaves")
    level: int = Field(1, ge=1)
    degree: Optional[int] = None

    def to_spec(self) -> clasper.ClasperSpec:
        words = [freegroup.parse_word(leaf.word, self.r) for leaf in self.leaves]
        r = self.r or max([freegroup.rank_of(w) for w in words] + [1])
        leaves = tuple(clasper.Leaf(w, leaf.framing) for w, leaf in zip(words, self.leaves))
        return clasper.ClasperSpec(
            self.shape.to_tree(), leaves, tuple(tuple(row) for row in self.leaf_linking), r, self.level
        )

    @classmethod
    def from_spec(cls, spec: clasper.ClasperSpec) -> "ClasperSpecModel":
        return cls(
            shape=TreeModel.from_tree(spec.shape),
            leaves=[LeafModel(word=freegroup.word_to_string(leaf.word), framing=leaf.framing) for leaf in spec.leaves],
            leaf_linking=[list(row) for row in spec.leaf_linking],
            r=spec.r,
            level=spec.level,
            degree=spec.degree,
        )


class CheckModel(BaseModel):
    leaf: str
    word: str
    check: str
    passed: bool


class CertificateModel(Versioned):
    level: int
    granted: bool
    checks: List[CheckModel]

    @classmethod
    def from_certificate(cls, cert: clasper.Certificate) -> "CertificateModel":
        return cls(level=cert.level, granted=cert.granted, checks=[CheckModel(**c) for c in cert.checks])


class CurveModel(BaseModel):
    label: str
    kind: Literal["edge", "leaf"]
    word: str
    framing: int
    clasper: int = 0


class SurgeryPresentationModel(Versioned):
    r: int
    curves: List[CurveModel]
    linking: List[List[int]]
    arms: List[Tuple[str, str]]
    vortices: List[Tuple[str, str, str]]
    hopf_pairs: List[Tuple[str, str]] = Field(default_factory=list)
    certificates: List[CertificateModel] = Field(default_factory=list)
    reduced: Optional[ClasperSpecModel] = None

    @classmethod
    def from_presentation(cls, p: clasper.SurgeryPresentation) -> "SurgeryPresentationModel":
        return cls(
            r=p.r,
            curves=[
                CurveModel(label=c.label, kind=c.kind, word=freegroup.word_to_string(c.word),
                           framing=c.framing, clasper=c.clasper)
                for c in p.curves
            ],
            linking=p.linking,
            arms=list(p.arms),
            vortices=list(p.vortices),
            hopf_pairs=list(p.hopf_pairs),
            certificates=[CertificateModel.from_certificate(c) for c in p.certificates],
        )

    def to_presentation(self) -> clasper.SurgeryPresentation:
        curves = [
            clasper.Curve(c.label, c.kind, freegroup.parse_word(c.word, self.r), c.framing, c.clasper)
            for c in self.curves
        ]
        certs = [
            clasper.Certificate(level=c.level, checks=[m.model_dump() for m in c.checks], granted=c.granted)
            for c in self.certificates
        ]
        return clasper.SurgeryPresentation(
            r=self.r,
            curves=curves,
            linking=[list(row) for row in self.linking],
            arms=[tuple(a) for a in self.arms],
            vortices=[tuple(v) for v in self.vortices],
            hopf_pairs=[tuple(h) for h in self.hopf_pairs],
            certificates=certs,
        )


class SphereVerdictModel(BaseModel):
    passed: bool
    designated: List[Tuple[int, int]]
    reasons: List[str]
    assumption: str


# --- gluing ----------------------------------------------------------------------------


class ForestTermModel(BaseModel):
    coeff: Rational
    trees: List[TreeModel]


class LeggedSeriesModel(Versioned):
    labels: List[str]
    Q: List[List[Rational]]
    R: List[ForestTermModel]
    cap: int = Field(..., ge=0)

    def to_series(self) -> aarhus.LeggedSeries:
        Q = aarhus.StrutMatrix.from_rows(self.labels, [[parse_frac(x) for x in row] for row in self.Q])
        R = [
            aarhus.ForestTerm(tuple(t.to_tree() for t in term.trees), parse_frac(term.coeff))
            for term in self.R
        ]
        return aarhus.LeggedSeries(Q, R, self.cap)

    @classmethod
    def from_series(cls, series: aarhus.LeggedSeries) -> "LeggedSeriesModel":
        return cls(
            labels=list(series.Q.labels),
            Q=[[frac_str(x) for x in row] for row in series.Q.entries],
            R=[
                ForestTermModel(coeff=frac_str(t.coeff), trees=[TreeModel.from_tree(x) for x in t.trees])
                for t in series.R
            ],
            cap=series.cap,
        )


class GluingResultModel(Versioned):
    min_degree: Optional[int]
    value: TreeVectorModel
    per_degree: Dict[str, TreeVectorModel]
    vanishing: Dict[str, bool]
    forests: List[ForestTermModel] = Field(default_factory=list)
    sign_convention: str

    @classmethod
    def from_result(cls, result: aarhus.GluingResult) -> "GluingResultModel":
        return cls(
            min_degree=result.min_degree,
            value=TreeVectorModel.from_vector(result.value),
            per_degree={str(d): TreeVectorModel.from_vector(v) for d, v in result.per_degree.items()},
            vanishing={str(d): z for d, z in result.vanishing.items()},
            forests=[
                ForestTermModel(coeff=frac_str(c), trees=[TreeModel.from_tree(t) for t in key])
                for key, c in result.forests.items()
            ],
            sign_convention=result.sign_convention,
        )


class StageModel(BaseModel):
    name: str
    seconds: float


class VerdictModel(BaseModel):
    operation: str
    check: str
    passed: bool


class ZminReportModel(Versioned):
    verdict: Literal["PASS", "FAIL"]
    min_degree: Optional[int]
    target_degree: int
    matched_sign: Optional[Literal["+", "-"]]
    lower_degrees_vanish: bool
    route: str
    target: TreeModel
    result: GluingResultModel
    presentation: SurgeryPresentationModel
    sphere: SphereVerdictModel
    oracle_agrees: Optional[bool] = None
    filtered_agrees: Optional[bool] = None

    @classmethod
    def from_report(cls, report: aarhus.ZminReport) -> "ZminReportModel":
        presentation = SurgeryPresentationModel.from_presentation(report.presentation)
        if report.reduced is not None:
            presentation.reduced = ClasperSpecModel.from_spec(report.reduced)
        sign = {1: "+", -1: "-"}.get(report.matched_sign)
        return cls(
            verdict="PASS" if report.passed else "FAIL",
            min_degree=report.min_degree,
            target_degree=report.target.degree,
            matched_sign=sign,
            lower_degrees_vanish=report.lower_degrees_vanish,
            route=report.route,
            target=TreeModel.from_tree(report.target),
            result=GluingResultModel.from_result(report.result),
            presentation=presentation,
            sphere=SphereVerdictModel(
                passed=report.sphere.passed,
                designated=report.sphere.designated,
                reasons=report.sphere.reasons,
                assumption=report.sphere.assumption,
            ),
            oracle_agrees=report.oracle_agrees,
            filtered_agrees=report.filtered_agrees,
        )


class RunReport(Versioned):
    """What the CLI did: stages and timings, certificates, verdicts, and a
    digest of the input"""

    command: str
    input_digest: Optional[str] = None
    stages: List[StageModel] = Field(default_factory=list)
    certificates: List[CertificateModel] = Field(default_factory=list)
    verdicts: List[VerdictModel] = Field(default_factory=list)
    output: Optional[dict] = None


# --- API requests ---------------------------------------------------------------------------


class TreeRequest(BaseModel):
    tree: TreeModel


class IhxRequest(BaseModel):
    tree: TreeModel
    edge: Tuple[int, int]


class TreeVectorRequest(BaseModel):
    vector: TreeVectorModel


class DimRequest(BaseModel):
    degree: int = Field(..., ge=1, examples=[2])
    colors: int = Field(..., ge=1, examples=[3])


class WordRequest(BaseModel):
    word: str = Field(..., examples=["[x1,x2]"])
    r: Optional[int] = Field(None, ge=1)
    cap: int = Field(3, ge=1)


class FoxRequest(BaseModel):
    word: str = Field(..., examples=["[x1,x2]"])
    generator: int = Field(..., ge=1)
    level: int = Field(1, ge=0)


class DerivedRequest(BaseModel):
    word: str
    n: int = Field(..., ge=0)


class TreeExpansionRequest(BaseModel):
    word: str
    cap: int = Field(..., ge=1)
    root_label: Label = "root"


class ZminRequest(BaseModel):
    pattern: PatternModel
    cap: Optional[int] = Field(None, ge=1)
    route: Literal["reduce", "expand"] = "reduce"
    oracle: bool = False


class GlueRequest(BaseModel):
    series: LeggedSeriesModel
    brute: bool = False


class InverseRequest(BaseModel):
    matrix: List[List[Rational]]


class ErrorResponse(BaseModel):
    """Error response model"""
    detail: str
