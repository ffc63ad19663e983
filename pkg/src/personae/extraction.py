"""Turn raw biography text into ordered lists of cleaned identity phrases.

Two extractors are provided. The Twitter-style extractor splits free-text
bios on a documented delimiter table and cleans each chunk. The
Wikipedia-style extractor applies a rule-based copular grammar to the first
sentence of a biography. A synthetic generator plants community structure
for testing.

Delimiter table (Twitter chunking)
----------------------------------
A chunk boundary is any of:

==========================  ====================================
delimiter                   notes
==========================  ====================================
``,``  ``;``  ``|``         always
newline                     always
``•`` ``·`` ``●`` ``▪``     bullet characters
en/em dash                  only with whitespace on both sides
two or more spaces          run collapses into one boundary
``/``                       only when NOT flanked on both sides
                            by short tokens of 1-4 word
                            characters ("she/her" is kept,
                            "singer/songwriter" is split)
==========================  ====================================

Cleaning rules, applied to each chunk in order:

1. Unicode NFC normalization, whitespace collapse.
2. Strip leading/trailing punctuation, symbols and emoji. A leading ``#``
   is kept so hashtag identities survive.
3. Repeatedly strip lead-ins "i am" / "i'm" and leading articles
   (a, an, the) until stable.
4. Strip edges again, collapse whitespace, casefold.
5. Drop the chunk if it is empty or longer than ``max_tokens``
   whitespace-separated tokens (default 12).
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSpec, NoCopulaFound

SOURCES = ("twitter", "wikipedia", "synthetic")

DEFAULT_MAX_TOKENS = 12

# Bullet characters and unconditional single-character delimiters.
_CHUNK_RE = re.compile(r"[,;|\n•·●▪]|\s[–—]\s| {2,}")

_WS_RE = re.compile(r"\s+")
_LEAD_IN_RE = re.compile(r"^(?:i\s+am|i['’]m)(?:\s+|$)", re.IGNORECASE)
_ARTICLE_RE = re.compile(r"^(?:a|an|the)\s+", re.IGNORECASE)

# Tokens this short on both sides of a slash mark pronoun-style pairs.
_SLASH_KEEP_LEN = 4


@dataclass
class RawBio:
    """One unprocessed biography record."""

    id: str
    source: str
    text: str


@dataclass
class Bio:
    """A biography reduced to its ordered identity phrases."""

    id: str
    identities: list[str]
    source: str


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for a planted-community test corpus.

    ``popularity_exponent`` controls how skewed the within-community
    identity popularity is (0 gives a uniform draw; the default 1.5 gives
    a Zipf-like heavy tail). Real identity frequencies are heavily skewed,
    and a skew is also what gives a trained model popular identities to
    prefer when ranking held-out targets, so recovery tests stay
    meaningful; a uniform draw makes all community members exchangeable
    and caps ranking accuracy near chance within the community.
    """

    n_communities: int
    identities_per_community: int
    n_bios: int
    identities_per_bio: tuple[int, int]
    noise_rate: float
    seed: int
    popularity_exponent: float = 1.5

    def validate(self):
        lo, hi = self.identities_per_bio
        if self.n_communities < 1 or self.identities_per_community < 1 or self.n_bios < 1:
            raise InfeasibleSpec("counts must be positive")
        if lo < 2:
            raise InfeasibleSpec("identities_per_bio minimum must be >= 2")
        if lo > hi:
            raise InfeasibleSpec("identities_per_bio range is inverted")
        if hi > self.identities_per_community:
            raise InfeasibleSpec(
                f"bios of size {hi} cannot be drawn from communities of "
                f"{self.identities_per_community} identities"
            )
        if not 0.0 <= self.noise_rate <= 1.0:
            raise InfeasibleSpec("noise_rate must lie in [0, 1]")


def _split_slashes(chunk: str) -> list[str]:
    """Split on slashes unless both neighbours are short tokens."""
    parts = []
    start = 0
    for m in re.finditer("/", chunk):
        i = m.start()
        left = re.search(r"\w+$", chunk[:i])
        right = re.match(r"\w+", chunk[i + 1:])
        left_len = len(left.group()) if left else 0
        right_len = len(right.group()) if right else 0
        if 1 <= left_len <= _SLASH_KEEP_LEN and 1 <= right_len <= _SLASH_KEEP_LEN:
            continue
        parts.append(chunk[start:i])
        start = i + 1
    parts.append(chunk[start:])
    return parts


def _strip_edges(s: str) -> str:
    """Strip punctuation/symbol/format characters and spaces from both ends.

    A leading '#' survives so hashtags keep their marker; a trailing '#'
    does not.
    """
    i, j = 0, len(s)
    while i < j:
        ch = s[i]
        if ch == "#":
            break
        cat = unicodedata.category(ch)
        if ch.isspace() or cat[0] in "PS" or cat == "Cf":
            i += 1
        else:
            break
    while j > i:
        ch = s[j - 1]
        cat = unicodedata.category(ch)
        if ch.isspace() or cat[0] in "PS" or cat == "Cf":
            j -= 1
        else:
            break
    return s[i:j]


def clean_phrase(chunk: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str | None:
    """Apply the cleaning rules to one chunk.

    Returns the cleaned phrase, or None when the chunk dies (empty after
    cleaning, or longer than ``max_tokens`` tokens).
    """
    s = unicodedata.normalize("NFC", chunk)
    s = _WS_RE.sub(" ", s).strip()
    s = _strip_edges(s)
    changed = True
    while changed:
        changed = False
        for rx in (_LEAD_IN_RE, _ARTICLE_RE):
            new = rx.sub("", s)
            if new != s:
                s, changed = new, True
    s = _strip_edges(s)
    s = _WS_RE.sub(" ", s).strip().casefold()
    if not s or len(s.split()) > max_tokens:
        return None
    return s


def extract_twitter(raw: RawBio, max_tokens: int = DEFAULT_MAX_TOKENS) -> Bio:
    """Extract identity phrases from a free-text bio.

    Never fails: a bio with no surviving chunks yields an empty identity
    list. Chunk order follows surface order.
    """
    identities = []
    # Normalize before chunking: NFC can compose delimiter characters
    # (e.g. U+0387 becomes the middle dot), which must split, not survive.
    text = unicodedata.normalize("NFC", raw.text)
    for piece in _CHUNK_RE.split(text):
        for chunk in _split_slashes(piece):
            phrase = clean_phrase(chunk, max_tokens=max_tokens)
            if phrase is not None:
                identities.append(phrase)
    return Bio(id=raw.id, identities=identities, source=raw.source)


# Copular predicate grammar for first sentences.

_PAREN_RE = re.compile(r"\([^)]*\)")
_COPULA_RE = re.compile(r"\b(?:is|was)\b")
_PRED_START_RE = re.compile(r"^(?:(?:also|currently|now|both)\s+)?(?:a|an|the)\s+", re.IGNORECASE)
_CLAUSE_CUT_RE = re.compile(r"\b(?:who|whom|whose|which|that|where|when)\b")
_COORD_SPLIT_RE = re.compile(r",\s*(?:and\s+|or\s+)?|\s+(?:and|or)\s+")

DEFAULT_NATIONALITIES = frozenset(
    w.casefold()
    for w in (
        "afghan albanian algerian american angolan argentine argentinian armenian "
        "australian austrian azerbaijani bangladeshi belarusian belgian bolivian "
        "bosnian brazilian british bulgarian burmese cambodian cameroonian canadian "
        "chilean chinese colombian congolese croatian cuban czech danish dutch "
        "ecuadorian egyptian english estonian ethiopian filipino finnish french "
        "georgian german ghanaian greek guatemalan haitian honduran hungarian "
        "icelandic indian indonesian iranian iraqi irish israeli italian ivorian "
        "jamaican japanese jordanian kazakh kenyan korean kosovar kuwaiti laotian "
        "latvian lebanese liberian libyan lithuanian macedonian malagasy malaysian "
        "malian maltese mexican moldovan mongolian moroccan mozambican namibian "
        "nepalese nicaraguan nigerian norwegian pakistani palestinian panamanian "
        "paraguayan peruvian polish portuguese qatari romanian russian rwandan "
        "salvadoran saudi scottish senegalese serbian singaporean slovak slovenian "
        "somali spanish sudanese swedish swiss syrian taiwanese tanzanian thai "
        "tunisian turkish ugandan ukrainian uruguayan uzbek venezuelan vietnamese "
        "welsh yemeni zambian zimbabwean"
    ).split()
)

# Two-token demonyms checked before single tokens.
DEFAULT_NATIONALITIES_2 = frozenset(
    ("new zealand", "south african", "south korean", "north korean", "sri lankan",
     "costa rican", "puerto rican", "saudi arabian", "hong kong")
)


def _strip_nationalities(tokens: list[str], single: frozenset, double: frozenset) -> list[str]:
    """Drop leading nationality adjectives, including hyphenated pairs."""
    while tokens:
        if len(tokens) >= 2 and f"{tokens[0]} {tokens[1]}".casefold() in double:
            tokens = tokens[2:]
            continue
        head = tokens[0].casefold()
        if head in single:
            tokens = tokens[1:]
            continue
        if "-" in head and all(p in single for p in head.split("-") if p):
            tokens = tokens[1:]
            continue
        break
    return tokens


def extract_wikipedia(
    raw: RawBio,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    nationalities: frozenset = DEFAULT_NATIONALITIES,
    nationalities_2: frozenset = DEFAULT_NATIONALITIES_2,
) -> Bio:
    """Extract predicate noun phrases from a biography's first sentence.

    Matches the pattern family "SUBJECT is/was a/an [modifiers]* NOUN
    (, NOUN)* (and NOUN)?". The subject is discarded, coordinated noun
    phrases are split, and leading articles plus nationality adjectives
    are stripped from each phrase.

    Raises NoCopulaFound when the sentence does not match the pattern.
    """
    text = _PAREN_RE.sub(" ", raw.text)
    text = _WS_RE.sub(" ", text).strip()
    m = _COPULA_RE.search(text)
    if m is None or m.start() == 0:
        raise NoCopulaFound(f"no copular predicate in {raw.id!r}")
    predicate = text[m.end():].strip()
    if not _PRED_START_RE.match(predicate):
        raise NoCopulaFound(f"predicate does not start with an article in {raw.id!r}")
    cut = _CLAUSE_CUT_RE.search(predicate)
    if cut is not None:
        predicate = predicate[: cut.start()]
    predicate = predicate.rstrip(" .").strip()

    identities = []
    for np_chunk in _COORD_SPLIT_RE.split(predicate):
        tokens = np_chunk.split()
        if tokens and tokens[0].casefold() in ("a", "an", "the"):
            tokens = tokens[1:]
        tokens = _strip_nationalities(tokens, nationalities, nationalities_2)
        if not tokens:
            continue
        phrase = clean_phrase(" ".join(tokens), max_tokens=max_tokens)
        if phrase is not None:
            identities.append(phrase)
    return Bio(id=raw.id, identities=identities, source=raw.source)


# Synthetic corpus with planted community structure.

def synthetic_identity(community: int, member: int) -> str:
    """Name of a planted identity. Two space-separated tokens so the
    phrase survives the underscore convention of embedding files."""
    return f"c{community:02d} id{member:03d}"


def community_of(phrase: str) -> int:
    """Recover the planted community from an identity name."""
    return int(phrase.split()[0][1:])


def generate_synthetic(spec: SyntheticSpec) -> list[Bio]:
    """Generate a corpus of bios with planted co-occurrence communities.

    Deterministic for a fixed spec. Each bio draws its size uniformly
    from the configured range, picks one community uniformly, draws that
    many distinct identities from the community (weighted by the
    popularity distribution), then independently replaces each identity
    with probability ``noise_rate`` by a uniform draw over all
    identities. Noise replacement can duplicate an identity within a bio;
    downstream counting de-duplicates.
    """
    spec.validate()
    lo, hi = spec.identities_per_bio
    n_ident = spec.n_communities * spec.identities_per_community
    names = [
        synthetic_identity(c, i)
        for c in range(spec.n_communities)
        for i in range(spec.identities_per_community)
    ]
    ranks = np.arange(1, spec.identities_per_community + 1, dtype=float)
    weights = ranks ** (-spec.popularity_exponent)
    weights /= weights.sum()

    rng = np.random.default_rng(spec.seed)
    bios = []
    for b in range(spec.n_bios):
        size = int(rng.integers(lo, hi + 1))
        comm = int(rng.integers(spec.n_communities))
        members = rng.choice(spec.identities_per_community, size=size, replace=False, p=weights)
        ids = [comm * spec.identities_per_community + int(mbr) for mbr in members]
        noise = rng.random(size) < spec.noise_rate
        for pos in np.flatnonzero(noise):
            ids[pos] = int(rng.integers(n_ident))
        bios.append(Bio(id=f"synth-{b:06d}", identities=[names[i] for i in ids], source="synthetic"))
    return bios


# Newline-delimited record I/O.
#
# Raw input:  id <TAB> source <TAB> text
# Extracted:  id <TAB> source <TAB> JSON array of identity strings

def read_raw_bios(path) -> list[RawBio]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise ValueError(f"{path}:{ln}: expected 3 tab-separated fields")
            records.append(RawBio(id=parts[0], source=parts[1], text=parts[2]))
    return records


def write_bios(path, bios: list[Bio]):
    import json

    with open(path, "w", encoding="utf-8") as fh:
        for bio in bios:
            fh.write(f"{bio.id}\t{bio.source}\t{json.dumps(bio.identities, ensure_ascii=False)}\n")


def read_bios(path) -> list[Bio]:
    import json

    bios = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise ValueError(f"{path}:{ln}: expected 3 tab-separated fields")
            bios.append(Bio(id=parts[0], identities=json.loads(parts[2]), source=parts[1]))
    return bios
