"""Streaming CSV parsers and writers for the four corpus files.

Formats (UTF-8, RFC 4180 quoting, header row required):

    papers.csv       paper_id,doc_type,subfield_id
    authorships.csv  paper_id,author_id
    citations.csv    citing_paper_id,cited_paper_id
    taxonomy.csv     subfield_id,subfield_name,field_id,field_name

Parsers are generators over one pass of the input and never materialize a
whole file, so corpora with 1e8 rows stream in constant memory. Every
dropped row is counted by reason in the per-file stats.
"""

from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .corpus import (
    AuthorshipRecord,
    CitationEdge,
    DocType,
    FieldTaxonomy,
    PaperRecord,
    SubfieldInfo,
)
from .errors import CitegraphError

PAPERS_HEADER = ["paper_id", "doc_type", "subfield_id"]
AUTHORSHIPS_HEADER = ["paper_id", "author_id"]
CITATIONS_HEADER = ["citing_paper_id", "cited_paper_id"]
TAXONOMY_HEADER = ["subfield_id", "subfield_name", "field_id", "field_name"]


class IngestError(CitegraphError):
    """Malformed input file; message always carries the offending line number."""


@dataclass
class FileIngestStats:
    """Row accounting for one parsed file: rows_read = emitted + dropped + header."""

    rows_read: int = 0
    emitted: int = 0
    dropped: dict[str, int] = field(default_factory=dict)
    duration_s: float = 0.0

    def drop(self, reason: str) -> None:
        self.dropped[reason] = self.dropped.get(reason, 0) + 1

    @property
    def n_dropped(self) -> int:
        return sum(self.dropped.values())


@dataclass
class IngestReport:
    files: dict[str, FileIngestStats] = field(default_factory=dict)

    def stats_for(self, name: str) -> FileIngestStats:
        return self.files.setdefault(name, FileIngestStats())


def _text_stream(source: IO) -> IO[str]:
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _rows(source: IO, expected_header: list[str], stats: FileIngestStats) -> Iterator[tuple[int, list[str]]]:
    reader = csv.reader(_text_stream(source))
    try:
        header = next(reader, None)
    except csv.Error as exc:
        raise IngestError(f"line 1: malformed CSV: {exc}") from exc
    if header is None:
        raise IngestError("line 1: missing header row")
    stats.rows_read += 1
    if [col.strip().lstrip("﻿") for col in header] != expected_header:
        raise IngestError(
            f"line 1: expected header {','.join(expected_header)!r}, got {','.join(header)!r}"
        )
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise IngestError(f"line {reader.line_num}: malformed CSV: {exc}") from exc
        if not row:
            continue
        stats.rows_read += 1
        if len(row) != len(expected_header):
            raise IngestError(
                f"line {reader.line_num}: expected {len(expected_header)} fields, got {len(row)}"
            )
        yield reader.line_num, row


def parse_papers(source: IO, stats: FileIngestStats | None = None) -> Iterator[PaperRecord]:
    stats = stats if stats is not None else FileIngestStats()
    for line_num, (paper_id, doc_type, subfield_id) in _rows(source, PAPERS_HEADER, stats):
        if not paper_id:
            raise IngestError(f"line {line_num}: empty paper_id")
        stats.emitted += 1
        yield PaperRecord(
            paper_id=sys.intern(paper_id),
            doc_type=DocType.from_string(doc_type),
            subfield_id=sys.intern(subfield_id) if subfield_id else None,
        )


def parse_authorships(source: IO, stats: FileIngestStats | None = None) -> Iterator[AuthorshipRecord]:
    stats = stats if stats is not None else FileIngestStats()
    for line_num, (paper_id, author_id) in _rows(source, AUTHORSHIPS_HEADER, stats):
        if not paper_id or not author_id:
            raise IngestError(f"line {line_num}: empty paper_id or author_id")
        stats.emitted += 1
        yield AuthorshipRecord(paper_id=sys.intern(paper_id), author_id=sys.intern(author_id))


def parse_citations(source: IO, stats: FileIngestStats | None = None) -> Iterator[CitationEdge]:
    """Yield citation edges; self-loop rows are dropped and counted, not errors."""
    stats = stats if stats is not None else FileIngestStats()
    for line_num, (citing, cited) in _rows(source, CITATIONS_HEADER, stats):
        if not citing or not cited:
            raise IngestError(f"line {line_num}: empty citing_paper_id or cited_paper_id")
        if citing == cited:
            stats.drop("self_loop")
            continue
        stats.emitted += 1
        yield CitationEdge(citing_paper_id=sys.intern(citing), cited_paper_id=sys.intern(cited))


def parse_taxonomy(source: IO, stats: FileIngestStats | None = None) -> FieldTaxonomy:
    stats = stats if stats is not None else FileIngestStats()
    entries = []
    for line_num, (subfield_id, subfield_name, field_id, field_name) in _rows(
        source, TAXONOMY_HEADER, stats
    ):
        if not subfield_id or not field_id:
            raise IngestError(f"line {line_num}: empty subfield_id or field_id")
        stats.emitted += 1
        entries.append(
            SubfieldInfo(
                subfield_id=sys.intern(subfield_id),
                subfield_name=subfield_name,
                field_id=sys.intern(field_id),
                field_name=field_name,
            )
        )
    return FieldTaxonomy(entries)


def _write_rows(path: str, header: list[str], rows: Iterable[Iterable[str]]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            n += 1
    return n


def write_papers(path: str, records: Iterable[PaperRecord]) -> int:
    return _write_rows(
        path,
        PAPERS_HEADER,
        ((r.paper_id, r.doc_type.value, r.subfield_id or "") for r in records),
    )


def write_authorships(path: str, records: Iterable[AuthorshipRecord]) -> int:
    return _write_rows(path, AUTHORSHIPS_HEADER, ((r.paper_id, r.author_id) for r in records))


def write_citations(path: str, records: Iterable[CitationEdge]) -> int:
    return _write_rows(
        path, CITATIONS_HEADER, ((r.citing_paper_id, r.cited_paper_id) for r in records)
    )


def write_taxonomy(path: str, taxonomy: FieldTaxonomy) -> int:
    return _write_rows(
        path,
        TAXONOMY_HEADER,
        ((e.subfield_id, e.subfield_name, e.field_id, e.field_name) for e in taxonomy),
    )
