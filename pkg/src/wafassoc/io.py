"""Plain-text readers and writers for genotypes, phenotypes and covariates.

Genotype files: a header row of SNV labels, then one row per subject of
comma- or tab-separated minor-allele counts (0, 1 or 2).  Missing genotypes
are not supported.  Which allele counts as "minor" is up to the caller.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .null_model import CovariateMatrix, PhenotypeVector, TraitKind
from .score import GenotypeMatrix

__all__ = [
    "parse_genotypes",
    "parse_phenotype",
    "parse_covariates",
    "write_genotypes",
    "write_phenotype",
    "write_covariates",
]

_ALLELE = {"0": 0, "1": 1, "2": 2}


def _split(line: str, delim: str):
    return [t.strip() for t in line.rstrip("\r\n").split(delim)]


def _delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def _content_lines(path):
    """Yield ``(lineno, text)`` for non-blank lines."""
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                yield lineno, line


def parse_genotypes(path) -> GenotypeMatrix:
    lines = _content_lines(path)
    try:
        _, header = next(lines)
    except StopIteration:
        raise ParseError("empty file", path) from None
    delim = _delimiter(header)
    labels = _split(header, delim)
    if any(not lab for lab in labels):
        raise ParseError("empty SNV label in header", path, 1)
    K = len(labels)
    rows = []
    for lineno, line in lines:
        toks = _split(line, delim)
        if len(toks) != K:
            raise ParseError(f"expected {K} fields, found {len(toks)}", path, lineno)
        try:
            rows.append([_ALLELE[t] for t in toks])
        except KeyError:
            bad = next(t for t in toks if t not in _ALLELE)
            raise ParseError(f"invalid genotype token {bad!r} (allowed: 0, 1, 2)", path, lineno) from None
    if not rows:
        raise ParseError("no subjects", path)
    try:
        return GenotypeMatrix(np.array(rows, dtype=np.int8), tuple(labels))
    except ValidationError as exc:
        raise ParseError(str(exc), path) from None


def _is_number(tok: str) -> bool:
    try:
        return math.isfinite(float(tok))
    except ValueError:
        return False


def parse_phenotype(path, kind=None) -> PhenotypeVector:
    """One trait value per line, optionally under a single header line.

    With ``kind=None`` the trait is binary when every value is 0 or 1.
    """
    vals = []
    for i, (lineno, line) in enumerate(_content_lines(path)):
        tok = line.strip()
        if "," in tok or "\t" in tok:
            raise ParseError("phenotype file must have a single column", path, lineno)
        if not _is_number(tok):
            if i == 0:
                continue
            raise ParseError(f"not a finite number: {tok!r}", path, lineno)
        vals.append(float(tok))
    if not vals:
        raise ParseError("no subjects", path)
    y = np.array(vals)
    if kind is None:
        kind = TraitKind.BINARY if np.all((y == 0) | (y == 1)) else TraitKind.CONTINUOUS
    try:
        return PhenotypeVector(y, kind)
    except ValidationError as exc:
        raise ParseError(str(exc), path) from None


def parse_covariates(path) -> CovariateMatrix:
    lines = _content_lines(path)
    try:
        _, header = next(lines)
    except StopIteration:
        raise ParseError("empty file", path) from None
    delim = _delimiter(header)
    labels = _split(header, delim)
    rows = []
    for lineno, line in lines:
        toks = _split(line, delim)
        if len(toks) != len(labels):
            raise ParseError(f"expected {len(labels)} fields, found {len(toks)}", path, lineno)
        if not all(_is_number(t) for t in toks):
            raise ParseError("covariates must be finite numbers", path, lineno)
        rows.append([float(t) for t in toks])
    if not rows:
        raise ParseError("no subjects", path)
    try:
        return CovariateMatrix(np.array(rows), tuple(labels))
    except ValidationError as exc:
        raise ParseError(str(exc), path) from None


def write_genotypes(path, G: GenotypeMatrix, delimiter: str = ",") -> None:
    with open(path, "w") as fh:
        fh.write(delimiter.join(G.snv_labels) + "\n")
        for row in G.counts:
            fh.write(delimiter.join(map(str, row.tolist())) + "\n")


def write_phenotype(path, Y: PhenotypeVector, header: str = "trait") -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for v in Y.values:
            fh.write(f"{int(v)}\n" if Y.kind is TraitKind.BINARY else f"{float(v)!r}\n")


def write_covariates(path, C: CovariateMatrix, delimiter: str = ",") -> None:
    with open(path, "w") as fh:
        fh.write(delimiter.join(C.labels) + "\n")
        for row in C.values:
            fh.write(delimiter.join(repr(float(x)) for x in row) + "\n")


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
