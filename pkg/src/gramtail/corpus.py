"""Phonetic word-list ingestion, inclusion filters, and n-gram profiles.

The canonical interchange format is a UTF-8 TSV with one transcribed
form per line:

    family <TAB> genus <TAB> doculect <TAB> iso <TAB> item_number
    <TAB> item_name <TAB> transcription <TAB> loan

where loan is 0 or 1, iso and genus may be empty, and lines starting
with '#' are comments.  The header row is required and validated.

Transcriptions use a reduced phonetic code declared by an Alphabet:
consonant and vowel symbols, a nasalization mark that attaches to the
preceding vowel, and two modifiers that fuse the preceding two or three
characters into a single segment.  A converter for the classic raw
word-list layout lives in :func:`convert_asjp_text`.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .errors import (
    DomainError,
    EmptyCorpusError,
    ParseError,
    TokenizationError,
)

log = logging.getLogger(__name__)

CANONICAL_COLUMNS = (
    "family",
    "genus",
    "doculect",
    "iso",
    "item_number",
    "item_name",
    "transcription",
    "loan",
)

RAW = "raw"
COMBINED = "combined"
_MODES = (RAW, COMBINED)

# separators between synonym variants inside one transcription field;
# n-grams never cross them
_WORD_SEPARATORS = set(", \t")


@dataclass(frozen=True)
class Alphabet:
    """Symbol inventory of the reduced phonetic code."""

    consonants: frozenset
    vowels: frozenset
    nasalization: str
    fuse2: str
    fuse3: str

    def __post_init__(self):
        classes = [
            set(self.consonants),
            set(self.vowels),
            {self.nasalization},
            {self.fuse2},
            {self.fuse3},
        ]
        seen = set()
        for cls in classes:
            if seen & cls:
                raise DomainError(f"alphabet classes overlap on {seen & cls}")
            seen |= cls

    @property
    def all_symbols(self) -> frozenset:
        return frozenset(
            set(self.consonants)
            | set(self.vowels)
            | {self.nasalization, self.fuse2, self.fuse3}
        )


# 34 consonants, 7 vowels, nasalization mark, and the two fuse modifiers
# of the standard reduced transcription code.
DEFAULT_ALPHABET = Alphabet(
    consonants=frozenset("pbfvmw8tdszcnrlSZCjT5ykgxNqXh7L4G!"),
    vowels=frozenset("ieE3auo"),
    nasalization="*",
    fuse2="~",
    fuse3="$",
)


def load_alphabet(path) -> Alphabet:
    """Read an alphabet declaration file: one `<class> <char>` per line."""
    consonants, vowels = set(), set()
    singles = {"nasalization": None, "fuse2": None, "fuse3": None}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw_line in enumerate(handle, start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or len(parts[1]) != 1:
                raise ParseError(f"expected '<class> <char>', got {line!r}", line=lineno)
            cls, char = parts
            if cls == "consonant":
                consonants.add(char)
            elif cls == "vowel":
                vowels.add(char)
            elif cls in singles:
                if singles[cls] is not None:
                    raise ParseError(f"duplicate {cls} declaration", line=lineno)
                singles[cls] = char
            else:
                raise ParseError(f"unknown symbol class {cls!r}", line=lineno)
    missing = [k for k, v in singles.items() if v is None]
    if missing or not consonants or not vowels:
        raise ParseError(f"incomplete alphabet declaration (missing {missing or 'letters'})")
    return Alphabet(
        consonants=frozenset(consonants),
        vowels=frozenset(vowels),
        nasalization=singles["nasalization"],
        fuse2=singles["fuse2"],
        fuse3=singles["fuse3"],
    )


@dataclass(frozen=True)
class WordEntry:
    item_number: int
    transcription: str
    loan: bool = False


@dataclass
class WordList:
    """One doculect: its metadata and transcribed items."""

    doculect: str
    family: str
    genus: str | None = None
    iso: str | None = None
    entries: list = field(default_factory=list)

    @property
    def attested_items(self) -> set:
        return {e.item_number for e in self.entries}

    def without_loans(self) -> "WordList":
        return WordList(
            doculect=self.doculect,
            family=self.family,
            genus=self.genus,
            iso=self.iso,
            entries=[e for e in self.entries if not e.loan],
        )

    def language_key(self):
        """Languages are identified by ISO code; doculects without one
        count as distinct singleton languages."""
        return ("iso", self.iso) if self.iso else ("doculect", self.doculect)


@dataclass
class FamilyCorpus:
    """All included word lists of one family (or genus), merged."""

    name: str
    word_lists: list
    languages: dict  # language key -> list of WordList

    @property
    def member_count(self) -> int:
        return len(self.languages)


def parse_canonical(stream) -> list:
    """Parse the canonical TSV into one WordList per doculect.

    ``stream`` is an iterable of lines (an open text file works).
    Malformed lines raise :class:`ParseError` with their line number;
    exact duplicate (doculect, item, transcription) rows are dropped
    with a logged warning.
    """
    lists: dict[str, WordList] = {}
    seen: set = set()
    header_done = False
    for lineno, raw_line in enumerate(stream, start=1):
        line = raw_line.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if not header_done:
            if tuple(f.strip() for f in fields) != CANONICAL_COLUMNS:
                raise ParseError(
                    f"bad header: expected {list(CANONICAL_COLUMNS)}, got {fields}",
                    line=lineno,
                )
            header_done = True
            continue
        if len(fields) != len(CANONICAL_COLUMNS):
            raise ParseError(
                f"expected {len(CANONICAL_COLUMNS)} columns, got {len(fields)}",
                line=lineno,
            )
        family, genus, doculect, iso, item_no, _item_name, transcription, loan = (
            f.strip() for f in fields
        )
        if not family or not doculect:
            raise ParseError("family and doculect must be non-empty", line=lineno)
        try:
            item = int(item_no)
        except ValueError:
            raise ParseError(f"item_number must be an integer, got {item_no!r}", line=lineno)
        if not 1 <= item <= 40:
            raise ParseError(f"item_number out of range 1..40: {item}", line=lineno)
        if not transcription:
            raise ParseError("empty transcription", line=lineno)
        if loan not in ("0", "1"):
            raise ParseError(f"loan must be 0 or 1, got {loan!r}", line=lineno)

        key = (doculect, item, transcription)
        if key in seen:
            log.warning("line %d: duplicate entry %r dropped", lineno, key)
            continue
        seen.add(key)

        if doculect not in lists:
            lists[doculect] = WordList(
                doculect=doculect,
                family=family,
                genus=genus or None,
                iso=iso or None,
            )
        else:
            existing = lists[doculect]
            if (existing.family, existing.genus, existing.iso) != (
                family,
                genus or None,
                iso or None,
            ):
                raise ParseError(
                    f"doculect {doculect!r} re-declared with different metadata",
                    line=lineno,
                )
        lists[doculect].entries.append(
            WordEntry(item_number=item, transcription=transcription, loan=loan == "1")
        )
    if not header_done:
        # empty input (or comments only) parses to an empty collection
        return []
    return list(lists.values())


def parse_canonical_file(path) -> list:
    with open(path, encoding="utf-8") as handle:
        return parse_canonical(handle)


def tokenize(transcription: str, mode: str = RAW, alphabet: Alphabet = DEFAULT_ALPHABET):
    """Split a transcription into word token sequences.

    Returns a list of words, each a list of symbol tokens; synonym
    separators and whitespace delimit words, and n-grams never cross
    them.  In raw mode every code character is its own token.  In
    combined mode the fuse modifiers merge the preceding two or three
    single characters into one token and the nasalization mark attaches
    to the preceding vowel.
    """
    if mode not in _MODES:
        raise DomainError(f"tokenize mode must be one of {_MODES}")
    if not transcription:
        raise DomainError("empty transcription")
    known = alphabet.all_symbols
    words: list[list[str]] = []
    current: list[str] = []
    starts: list[int] = []  # positions of current word's characters
    for pos, char in enumerate(transcription):
        if char in _WORD_SEPARATORS:
            if current:
                words.append(_fold(current, starts, mode, alphabet))
                current, starts = [], []
            continue
        if char not in known:
            raise TokenizationError(
                f"unknown character {char!r} at position {pos}", char=char, position=pos
            )
        current.append(char)
        starts.append(pos)
    if current:
        words.append(_fold(current, starts, mode, alphabet))
    if not words:
        raise DomainError("transcription contains no word material")
    return words


def _fold(chars, positions, mode, alphabet):
    if mode == RAW:
        return list(chars)
    tokens: list[str] = []
    fused: list[bool] = []
    for char, pos in zip(chars, positions):
        if char == alphabet.fuse2 or char == alphabet.fuse3:
            need = 2 if char == alphabet.fuse2 else 3
            if len(tokens) < need or any(fused[-need:]):
                raise TokenizationError(
                    f"modifier {char!r} at position {pos} lacks {need} plain "
                    "preceding characters",
                    char=char,
                    position=pos,
                )
            merged = "".join(tokens[-need:])
            del tokens[-need:], fused[-need:]
            tokens.append(merged)
            fused.append(True)
        elif char == alphabet.nasalization:
            if not tokens or tokens[-1][-1] not in alphabet.vowels:
                raise TokenizationError(
                    f"nasalization at position {pos} does not follow a vowel",
                    char=char,
                    position=pos,
                )
            tokens[-1] += char
            fused[-1] = True
        else:
            tokens.append(char)
            fused.append(False)
    return tokens


@dataclass(frozen=True)
class NGramProfile:
    """Counts of distinct n-gram types for n = 1..N over a merged corpus."""

    per_n_counts: dict

    def cumulative_size(self, k: int) -> int:
        return sum(self.per_n_counts[n] for n in range(1, k + 1))

    @property
    def n_max(self) -> int:
        return max(self.per_n_counts)


def _word_tokens(word_lists, mode, alphabet):
    for wl in word_lists:
        for entry in wl.entries:
            yield from tokenize(entry.transcription, mode, alphabet)


def gram_sets(word_lists, n_max: int, mode: str = RAW, alphabet: Alphabet = DEFAULT_ALPHABET):
    """Distinct n-gram types (as token tuples) per n over the given lists."""
    sets = {n: set() for n in range(1, n_max + 1)}
    for tokens in _word_tokens(word_lists, mode, alphabet):
        top = min(n_max, len(tokens))
        for n in range(1, top + 1):
            bucket = sets[n]
            for i in range(len(tokens) - n + 1):
                bucket.add(tuple(tokens[i : i + n]))
    return sets


def ngram_profile(
    corpus: FamilyCorpus,
    n_max: int,
    mode: str = RAW,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> NGramProfile:
    """Profile of a merged corpus: distinct 1..n_max gram counts.

    Windows never cross word boundaries; uniqueness is global across
    the whole corpus.
    """
    if not 1 <= n_max <= 10:
        raise DomainError("n_max must be in 1..10")
    if not corpus.word_lists or not any(wl.entries for wl in corpus.word_lists):
        raise EmptyCorpusError(f"corpus {corpus.name!r} has no transcribed material")
    sets = gram_sets(corpus.word_lists, n_max, mode, alphabet)
    return NGramProfile(per_n_counts={n: len(s) for n, s in sets.items()})


def _group(lists, key_fn, min_members: int) -> list:
    grouped: dict[str, list] = {}
    for wl in lists:
        grouped.setdefault(key_fn(wl), []).append(wl)
    corpora = []
    for name in sorted(grouped):
        members = grouped[name]
        languages: dict = {}
        for wl in members:
            languages.setdefault(wl.language_key(), []).append(wl)
        if len(languages) >= min_members:
            corpora.append(FamilyCorpus(name=name, word_lists=members, languages=languages))
    return corpora


def filter_word_lists(lists, min_items: int = 28) -> list:
    """Attestation filter, then loan removal, in that order."""
    kept = [wl for wl in lists if len(wl.attested_items) >= min_items]
    return [wl.without_loans() for wl in kept]


def apply_inclusion_filters(lists, min_items: int = 28, min_members: int = 4) -> list:
    """Standard inclusion pipeline: attestation, loans, family size.

    Word lists with fewer than ``min_items`` attested items are dropped,
    loan-flagged entries are removed from the survivors, and families
    with fewer than ``min_members`` distinct member languages are
    excluded entirely.
    """
    return _group(filter_word_lists(lists, min_items), lambda wl: wl.family, min_members)


def aggregate_by_genus(lists, min_items: int = 28, min_members: int = 1) -> list:
    """Group by genus with the same merging semantics as families.

    Word lists without a genus label are excluded (their count is
    logged); no member minimum is applied by default.
    """
    filtered = filter_word_lists(lists, min_items)
    labeled = [wl for wl in filtered if wl.genus]
    skipped = len(filtered) - len(labeled)
    if skipped:
        log.warning("aggregate_by_genus: %d word lists lack a genus label", skipped)
    return _group(labeled, lambda wl: wl.genus, min_members)


def language_pool(lists) -> dict:
    """All languages across the given word lists: key -> list of WordList."""
    pool: dict = {}
    for wl in lists:
        pool.setdefault(wl.language_key(), []).append(wl)
    return pool


def size_table(
    corpora,
    n_max: int = 5,
    ns=None,
    mode: str = RAW,
    alphabet: Alphabet = DEFAULT_ALPHABET,
):
    """One row per corpus: name, member count, cumulative profile sizes.

    ``ns`` selects which cumulative sizes to report (default 3..n_max).
    Rows are sorted descending by the largest requested size, ties
    broken by name.
    """
    if ns is None:
        ns = [n for n in range(3, n_max + 1)] or [n_max]
    ns = sorted(set(int(n) for n in ns))
    if ns and ns[-1] > n_max:
        raise DomainError(f"requested n={ns[-1]} exceeds n_max={n_max}")
    header = ["name", "nol"] + [f"cumulative_{n}gram" for n in ns]
    rows = []
    for corpus in corpora:
        profile = ngram_profile(corpus, n_max, mode, alphabet)
        rows.append(
            [corpus.name, corpus.member_count] + [profile.cumulative_size(n) for n in ns]
        )
    rows.sort(key=lambda row: (-row[-1], row[0]))
    return header, rows


# --------------------------------------------------------------------------
# Best-effort converter for the classic raw word-list layout
# --------------------------------------------------------------------------

_RAW_HEADER = re.compile(r"^(?P<name>[^{\s][^{]*)\{(?P<class1>[^}|]*)(?:\|(?P<rest>[^}]*))?\}")
_RAW_ITEM = re.compile(r"^\s*(?P<num>\d+)\s+(?P<item>\S+)\s+(?P<forms>.*?)\s*(?://.*)?$")


def convert_asjp_text(stream):
    """Convert classic raw word lists to canonical TSV rows.

    Assumptions (best effort; the raw layout is not formally specified):
    a language starts with `NAME{Family.Genus...}`; the following line
    is metadata whose final token, when it is three lowercase letters,
    is the ISO code; item lines read `N item form1, form2 //`; forms
    equal to XXX are missing; a form prefixed with % is a known loan.
    Yields (family, genus, doculect, iso, item_number, item_name,
    transcription, loan) tuples.
    """
    name = family = genus = iso = None
    expect_meta = False
    for raw_line in stream:
        line = raw_line.rstrip("\n")
        if not line.strip():
            continue
        header = _RAW_HEADER.match(line)
        if header:
            name = header.group("name").strip()
            classification = header.group("class1").strip()
            family, _, genus = classification.partition(".")
            family = family.strip() or "UNCLASSIFIED"
            genus = genus.strip()
            iso = None
            expect_meta = True
            continue
        if expect_meta:
            expect_meta = False
            tokens = line.split()
            if tokens and re.fullmatch(r"[a-z]{3}", tokens[-1]):
                iso = tokens[-1]
            continue
        item = _RAW_ITEM.match(line)
        if item and name:
            number = int(item.group("num"))
            if not 1 <= number <= 40:
                continue
            for form in item.group("forms").split(","):
                form = form.strip()
                loan = "0"
                if form.startswith("%"):
                    loan = "1"
                    form = form.lstrip("%").strip()
                if not form or form == "XXX":
                    continue
                yield (
                    family,
                    genus or "",
                    name,
                    iso or "",
                    str(number),
                    item.group("item"),
                    form,
                    loan,
                )
