"""
Walkability and car keyword lists, and tag matching against them.
"""
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, Iterable, Sequence, Set, Tuple, Union

from ..core.errors import ConfigError, EmptyInputError, InputFileError
from ..model.classify import normalize_tag

logger = logging.getLogger(__name__)

DEFAULT_WALK_KEYWORDS: Tuple[str, ...] = (
    "sidewalk",
    "footway",
    "street light",
    "clean street",
    "pedestrian",
    "bench",
    "resting",
    "tree",
    "greenery",
    "art",
    "architecture",
    "historical",
    "bike",
    "private",
    "hill",
    "social",
)
DEFAULT_CAR_KEYWORDS: Tuple[str, ...] = ("car", "cars")


@dataclass(frozen=True)
class KeywordLists:
    """Normalized walk and car keyword sets."""
    walk_keywords: FrozenSet[str]
    car_keywords: FrozenSet[str]

    def __post_init__(self):
        walk = frozenset(normalize_tag(k) for k in self.walk_keywords) - {""}
        car = frozenset(normalize_tag(k) for k in self.car_keywords) - {""}
        if not walk or not car:
            raise EmptyInputError(
                "Keyword lists must be non-empty",
                "features",
                {"walk": len(walk), "car": len(car)}
            )
        object.__setattr__(self, "walk_keywords", walk)
        object.__setattr__(self, "car_keywords", car)

    @classmethod
    def default(cls) -> "KeywordLists":
        return cls(frozenset(DEFAULT_WALK_KEYWORDS), frozenset(DEFAULT_CAR_KEYWORDS))


def load_keyword_lists(path: Union[str, Path]) -> KeywordLists:
    """
    Read keyword lists from a TOML file with `walk` and `car` string arrays.

    Either array may be omitted, in which case the built-in list is used.

    Raises:
        InputFileError: If the file cannot be read
        ConfigError: If the file is not valid TOML or an entry is not a string list
    """
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise InputFileError(f"Cannot read keyword file {path}: {e.strerror}", "features", {"path": str(path)})
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Invalid keyword file {path}: {e}", "features", {"path": str(path)})

    section = data.get("keywords", data)
    lists = {}
    for name, default in (("walk", DEFAULT_WALK_KEYWORDS), ("car", DEFAULT_CAR_KEYWORDS)):
        value = section.get(name, list(default))
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"Keyword list {name!r} must be an array of strings", "features", {"path": str(path)})
        lists[name] = frozenset(value)
    logger.info("Loaded %d walk and %d car keywords from %s", len(lists["walk"]), len(lists["car"]), path)
    return KeywordLists(lists["walk"], lists["car"])


def read_keyword_set(path: Union[str, Path]) -> Set[str]:
    """One keyword per line; blank lines and `#` comments are ignored."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise InputFileError(f"Cannot read keyword file {path}: {e.strerror}", "agree", {"path": str(path)})
    words = {normalize_tag(line.split("#", 1)[0]) for line in lines}
    words.discard("")
    return words


def match_tag_counts(user_tags: Iterable[str], lists: KeywordLists) -> Tuple[int, int]:
    """
    Count user tags matching the walk and car lists after normalization.

    A tag matches at most one list; walk keywords take precedence.

    Returns:
        Tuple[int, int]: (walk matches, car matches)
    """
    walk = car = 0
    for tag in user_tags:
        key = normalize_tag(tag)
        if key in lists.walk_keywords:
            walk += 1
        elif key in lists.car_keywords:
            car += 1
    return walk, car


def match_tag_arrays(tag_lists: Sequence[Sequence[str]], lists: KeywordLists) -> Tuple[list, list]:
    """match_tag_counts over many photos, memoizing normalized tags."""
    cache = {}
    walk_counts, car_counts = [], []
    for tags in tag_lists:
        walk = car = 0
        for tag in tags:
            hit = cache.get(tag)
            if hit is None:
                key = normalize_tag(tag)
                hit = 1 if key in lists.walk_keywords else 2 if key in lists.car_keywords else 0
                cache[tag] = hit
            if hit == 1:
                walk += 1
            elif hit == 2:
                car += 1
        walk_counts.append(walk)
        car_counts.append(car)
    return walk_counts, car_counts
