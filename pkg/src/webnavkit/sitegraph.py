"""Website snapshots parsed into an immutable directed navigation graph.

A snapshot is a directory
    <site>/pages/*.html       one file per webpage, page id = file stem
    <site>/assets/*           images referenced by the pages
    <site>/screenshots/<page_id>.png
    <site>/site.json          homepage id, selector config, stoplist path

Pages are connected by *buttons*: anchors (or configured extra elements)
whose target resolves to another page of the snapshot.  Each button carries
a text description and/or an image; the absent one is the empty string.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, replace
from html.parser import HTMLParser
from importlib import resources
from pathlib import Path, PurePosixPath
from typing import Callable, Iterable, Optional, Sequence
from urllib.parse import urlsplit

from .errors import (
    DuplicatePageId,
    MissingHomepage,
    NoContent,
    UnknownPageId,
)

logger = logging.getLogger(__name__)

AssetResolver = Callable[[str], Optional[str]]
CaptionLookup = Callable[[str], Optional[str]]


@dataclass(frozen=True)
class Button:
    """A clickable element linking to another page of the site.

    Either ``description`` or ``image_ref`` may be empty (but not both);
    the empty string is the "absent" marker.
    """

    button_id: str
    description: str
    image_ref: str
    target_page_id: str

    def has_content(self) -> bool:
        return bool(self.description) or bool(self.image_ref)


@dataclass(frozen=True)
class WebPage:
    page_id: str
    source_path: str
    screenshot_ref: str
    buttons: tuple[Button, ...]
    word_list: tuple[str, ...]
    captions: tuple[str, ...]
    # Raw visible text, kept for baselines that need sentence-level answers.
    raw_text: str = ""


@dataclass(frozen=True)
class NavGraph:
    """Directed graph of webpages; edges are the pages' buttons.

    Immutable after construction, so any number of simulator sessions can
    read it concurrently.
    """

    pages: dict[str, WebPage]
    homepage_id: str
    site_id: str = "site"
    dropped_buttons: int = 0

    def page(self, page_id: str) -> WebPage:
        try:
            return self.pages[page_id]
        except KeyError:
            raise UnknownPageId(page_id) from None

    @property
    def edge_count(self) -> int:
        return sum(len(p.buttons) for p in self.pages.values())

    def __contains__(self, page_id: str) -> bool:
        return page_id in self.pages


@dataclass(frozen=True)
class ClickSelector:
    """Extra clickable element kind: tag name + attribute holding the target."""

    tag: str
    attr: str


# --- text cleaning -------------------------------------------------------

def tokenize(text: str) -> list[str]:
    """Whitespace tokenization with lowercasing."""
    return text.lower().split()


def clean_text(raw_words: Iterable[str], stoplist: frozenset[str] | set[str]) -> list[str]:
    """Lowercase tokens, dropping stoplist members and punctuation-only tokens."""
    cleaned = []
    for word in raw_words:
        token = word.lower()
        if token in stoplist:
            continue
        if not any(ch.isalnum() for ch in token):
            continue
        cleaned.append(token)
    return cleaned


def load_stoplist(path: Path | str | None = None) -> frozenset[str]:
    """Read a stoplist file (one term per line, '#' comments allowed).

    Multi-word terms contribute each of their tokens, since cleaning is
    token-wise.  With no path, the packaged default list is used.
    """
    if path is None:
        text = resources.files("webnavkit.data").joinpath("stoplist.txt").read_text()
    else:
        text = Path(path).read_text()
    tokens: set[str] = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens.update(line.lower().split())
    return frozenset(tokens)


# --- HTML parsing --------------------------------------------------------

def internal_target(href: str) -> Optional[str]:
    """Page id a link points at, or None for external / non-page targets."""
    if not href:
        return None
    parts = urlsplit(href)
    if parts.scheme or parts.netloc or not parts.path:
        return None
    path = PurePosixPath(parts.path)
    if path.suffix not in ("", ".html", ".htm"):
        return None
    return path.stem or None


class _PageExtractor(HTMLParser):
    """Single pass over one document: buttons, visible text, image order."""

    _SKIP_TEXT = {"script", "style", "noscript", "head", "title"}

    def __init__(self, selectors: Sequence[ClickSelector]):
        super().__init__(convert_charrefs=True)
        self.selectors = {(s.tag.lower(), s.attr) for s in selectors}
        self.buttons: list[dict] = []
        self.text_parts: list[str] = []
        self.images: list[str] = []
        self._open_button: Optional[dict] = None
        self._button_tag: Optional[str] = None
        self._skip_depth = 0
        self.saw_anything = False

    def handle_starttag(self, tag, attrs):
        self.saw_anything = True
        attrs = dict(attrs)
        if tag in self._SKIP_TEXT:
            self._skip_depth += 1
            return
        if tag == "img":
            src = attrs.get("src") or ""
            if src:
                self.images.append(src)
            if self._open_button is not None:
                if src and not self._open_button["image"]:
                    self._open_button["image"] = src
                alt = (attrs.get("alt") or "").strip()
                if alt and not self._open_button["alt"]:
                    self._open_button["alt"] = alt
            return
        target = None
        if tag == "a":
            target = internal_target(attrs.get("href") or "")
        else:
            for sel_tag, sel_attr in self.selectors:
                if tag == sel_tag and attrs.get(sel_attr):
                    target = internal_target(attrs[sel_attr])
                    break
        if target is not None and self._open_button is None:
            self._open_button = {
                "target": target,
                "alt": (attrs.get("alt") or attrs.get("title") or "").strip(),
                "image": "",
                "text": [],
            }
            self._button_tag = tag

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag):
        if tag in self._SKIP_TEXT:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if self._open_button is not None and tag == self._button_tag:
            self.buttons.append(self._open_button)
            self._open_button = None
            self._button_tag = None

    def handle_data(self, data):
        if data.strip():
            self.saw_anything = True
        if self._skip_depth:
            return
        if self._open_button is not None:
            self._open_button["text"].append(data)
        self.text_parts.append(data)

    def close(self):
        super().close()
        if self._open_button is not None:  # tag soup: unclosed anchor
            self.buttons.append(self._open_button)
            self._open_button = None


def parse_page(
    html_source: str,
    page_id: str,
    asset_resolver: AssetResolver,
    *,
    selectors: Sequence[ClickSelector] = (),
    stoplist: frozenset[str] = frozenset(),
    screenshot_ref: str = "",
    source_path: str = "",
    caption_lookup: CaptionLookup | None = None,
) -> WebPage:
    """Extract buttons and cleaned text from one HTML document.

    Buttons come from anchors with an internal href plus any configured
    selector elements, in document order.  A button's description is the
    element's "alt" attribute (or its visible text); its image is the
    nested image source.  Missing image assets are dropped with a warning,
    keeping the button with the empty image marker.
    """
    if not html_source.strip():
        raise NoContent(f"page {page_id!r}: empty document")
    extractor = _PageExtractor(selectors)
    extractor.feed(html_source)
    extractor.close()
    if not extractor.saw_anything:
        raise NoContent(f"page {page_id!r}: no parsable content")

    buttons = []
    for i, raw in enumerate(extractor.buttons):
        description = raw["alt"] or " ".join(" ".join(raw["text"]).split())
        image_ref = ""
        if raw["image"]:
            resolved = asset_resolver(raw["image"])
            if resolved is None:
                logger.warning(
                    "page %s: image %r for button %d not found; keeping button without image",
                    page_id, raw["image"], i,
                )
            else:
                image_ref = resolved
        button = Button(
            button_id=f"{page_id}#btn{i}",
            description=description,
            image_ref=image_ref,
            target_page_id=raw["target"],
        )
        if not button.has_content():
            # A link with neither text nor image carries no signal; fall back
            # to the target id so the description invariant holds.
            button = replace(button, description=raw["target"])
        buttons.append(button)

    raw_text = " ".join(" ".join(extractor.text_parts).split())
    captions = []
    if caption_lookup is not None:
        for src in extractor.images:
            caption = caption_lookup(src)
            if caption:
                captions.append(caption)

    return WebPage(
        page_id=page_id,
        source_path=source_path,
        screenshot_ref=screenshot_ref,
        buttons=tuple(buttons),
        word_list=tuple(clean_text(tokenize(raw_text), stoplist)),
        captions=tuple(captions),
        raw_text=raw_text,
    )


# --- graph construction --------------------------------------------------

def build_graph(pages: Sequence[WebPage], homepage_id: str, site_id: str = "site") -> NavGraph:
    """Assemble parsed pages into a NavGraph.

    Buttons whose target is not among the given pages are dropped (the
    count is kept on the graph and logged).
    """
    by_id: dict[str, WebPage] = {}
    for page in pages:
        if page.page_id in by_id:
            raise DuplicatePageId(page.page_id)
        by_id[page.page_id] = page
    if homepage_id not in by_id:
        raise MissingHomepage(homepage_id)

    dropped = 0
    for pid, page in list(by_id.items()):
        kept = tuple(b for b in page.buttons if b.target_page_id in by_id)
        if len(kept) != len(page.buttons):
            dropped += len(page.buttons) - len(kept)
            by_id[pid] = replace(page, buttons=kept)
    if dropped:
        logger.warning("dropped %d buttons targeting pages outside the snapshot", dropped)
    return NavGraph(pages=by_id, homepage_id=homepage_id, site_id=site_id, dropped_buttons=dropped)


def shortest_path(graph: NavGraph, src: str, dst: str) -> Optional[list[str]]:
    """Minimum-transition page sequence from src to dst, or None if unreachable.

    Ties are broken by the lexicographically smallest button-index sequence:
    BFS visits pages in button document order, so the first-found parent of
    each page realizes that tie-break.
    """
    if src not in graph:
        raise UnknownPageId(src)
    if dst not in graph:
        raise UnknownPageId(dst)
    if src == dst:
        return [src]
    parent: dict[str, str] = {src: src}
    queue = deque([src])
    while queue:
        current = queue.popleft()
        for button in graph.page(current).buttons:
            nxt = button.target_page_id
            if nxt in parent:
                continue
            parent[nxt] = current
            if nxt == dst:
                path = [dst]
                while path[-1] != src:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(nxt)
    return None


def transitions_from(graph: NavGraph, src: str) -> dict[str, int]:
    """Shortest transition count from src to every reachable page."""
    dist = {src: 0}
    queue = deque([src])
    while queue:
        current = queue.popleft()
        for button in graph.page(current).buttons:
            nxt = button.target_page_id
            if nxt not in dist:
                dist[nxt] = dist[current] + 1
                queue.append(nxt)
    return dist


def validate_graph(graph: NavGraph) -> None:
    """Check the structural invariants; raises on violation."""
    if graph.homepage_id not in graph.pages:
        raise MissingHomepage(graph.homepage_id)
    for page in graph.pages.values():
        for button in page.buttons:
            if button.target_page_id not in graph.pages:
                raise UnknownPageId(
                    f"{page.page_id}: button {button.button_id} targets "
                    f"unknown page {button.target_page_id}"
                )
            if not button.has_content():
                raise ValueError(f"button {button.button_id} has neither description nor image")


# --- snapshot loading ----------------------------------------------------

def _make_asset_resolver(site_dir: Path) -> AssetResolver:
    def resolve(src: str) -> Optional[str]:
        name = PurePosixPath(urlsplit(src).path).name
        if not name:
            return None
        candidate = site_dir / "assets" / name
        if candidate.exists():
            return f"assets/{name}"
        return None

    return resolve


def load_site(site_dir: Path | str) -> NavGraph:
    """Parse a snapshot directory into a NavGraph.

    site.json keys: homepage_id (required), site_id, click_selectors
    (list of {tag, attr}), stoplist (path relative to the site dir, null for
    the packaged default), captions (path to a {image name: caption} json).
    """
    site_dir = Path(site_dir)
    config = json.loads((site_dir / "site.json").read_text())
    homepage_id = config["homepage_id"]
    site_id = config.get("site_id", site_dir.name)
    selectors = tuple(
        ClickSelector(tag=s["tag"], attr=s["attr"])
        for s in config.get("click_selectors", [])
    )
    stoplist_path = config.get("stoplist")
    stoplist = load_stoplist(site_dir / stoplist_path if stoplist_path else None)

    caption_lookup: CaptionLookup | None = None
    captions_path = config.get("captions")
    if captions_path and (site_dir / captions_path).exists():
        caption_map = json.loads((site_dir / captions_path).read_text())

        def caption_lookup(src: str, _m=caption_map) -> Optional[str]:
            return _m.get(PurePosixPath(urlsplit(src).path).name)

    resolver = _make_asset_resolver(site_dir)
    pages = []
    for html_path in sorted((site_dir / "pages").glob("*.html")):
        page_id = html_path.stem
        shot = site_dir / "screenshots" / f"{page_id}.png"
        if not shot.exists():
            logger.warning("page %s has no screenshot", page_id)
        pages.append(
            parse_page(
                html_path.read_text(),
                page_id,
                resolver,
                selectors=selectors,
                stoplist=stoplist,
                screenshot_ref=f"screenshots/{page_id}.png" if shot.exists() else "",
                source_path=f"pages/{html_path.name}",
                caption_lookup=caption_lookup,
            )
        )
    return build_graph(pages, homepage_id, site_id=site_id)


# --- serialization -------------------------------------------------------

def graph_to_json(graph: NavGraph) -> dict:
    pages = {}
    for pid in sorted(graph.pages):
        page = graph.pages[pid]
        pages[pid] = {
            "source_path": page.source_path,
            "screenshot_ref": page.screenshot_ref,
            "word_list": list(page.word_list),
            "captions": list(page.captions),
            "raw_text": page.raw_text,
            "buttons": [
                {
                    "button_id": b.button_id,
                    "description": b.description,
                    "image_ref": b.image_ref,
                    "target_page_id": b.target_page_id,
                }
                for b in page.buttons
            ],
        }
    edges = [
        [pid, b.target_page_id]
        for pid in sorted(graph.pages)
        for b in graph.pages[pid].buttons
    ]
    return {
        "site_id": graph.site_id,
        "homepage_id": graph.homepage_id,
        "pages": pages,
        "edges": edges,
    }


def graph_from_json(payload: dict) -> NavGraph:
    pages = []
    for pid, raw in payload["pages"].items():
        pages.append(
            WebPage(
                page_id=pid,
                source_path=raw.get("source_path", ""),
                screenshot_ref=raw.get("screenshot_ref", ""),
                buttons=tuple(
                    Button(
                        button_id=b["button_id"],
                        description=b["description"],
                        image_ref=b["image_ref"],
                        target_page_id=b["target_page_id"],
                    )
                    for b in raw["buttons"]
                ),
                word_list=tuple(raw["word_list"]),
                captions=tuple(raw.get("captions", [])),
                raw_text=raw.get("raw_text", ""),
            )
        )
    graph = build_graph(pages, payload["homepage_id"], site_id=payload.get("site_id", "site"))
    validate_graph(graph)
    return graph


def save_graph(graph: NavGraph, path: Path | str) -> None:
    Path(path).write_text(json.dumps(graph_to_json(graph), indent=2, sort_keys=True))


def load_graph(path: Path | str) -> NavGraph:
    return graph_from_json(json.loads(Path(path).read_text()))
