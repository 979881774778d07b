"""Synthetic fixture sites for tests, demos and desk-scale training.

``make_fixture_site`` writes a complete snapshot directory (pages, image
assets, screenshots, captions sidecar, site.json) for a small shopping
site: a homepage linking to category pages, each linking to product pages.
``make_mock_llm_responses`` writes the matching canned QA replies so the
data-generation pipeline runs fully offline.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, ImageDraw

from .sitegraph import Button, NavGraph, WebPage, build_graph

COLORS = ["crimson", "amber", "teal", "ivory", "slate", "olive", "coral", "indigo"]
MATERIALS = ["wool", "cotton", "silk", "linen", "fleece", "denim"]
CATEGORIES = ["Socks", "Blankets", "Hats", "Scarves", "Gloves"]
SIZE_SETS = ["S, M, L", "One size", "S, M, L, XL", "M, L"]

_RGB = {
    "crimson": (180, 40, 60),
    "amber": (220, 160, 40),
    "teal": (30, 140, 140),
    "ivory": (235, 230, 210),
    "slate": (100, 110, 125),
    "olive": (110, 120, 50),
    "coral": (240, 120, 100),
    "indigo": (70, 60, 150),
}


@dataclass(frozen=True)
class Product:
    page_id: str
    name: str
    category_index: int
    price: str
    sizes: str
    material: str
    color: str

    @property
    def image_name(self) -> str:
        return f"{self.page_id}.png"


def fixture_products(n_products: int) -> list[Product]:
    products = []
    for i in range(n_products):
        color = COLORS[i % len(COLORS)]
        material = MATERIALS[(i // len(COLORS)) % len(MATERIALS)]
        category_index = i % len(CATEGORIES)
        noun = CATEGORIES[category_index]
        products.append(
            Product(
                page_id=f"product{i:02d}",
                name=f"{color.capitalize()} {material.capitalize()} {noun}",
                category_index=category_index,
                price=f"${9 + (i * 7) % 40}.{(i * 13) % 100:02d}",
                sizes=SIZE_SETS[i % len(SIZE_SETS)],
                material=material,
                color=color,
            )
        )
    return products


def _write_screenshot(path: Path, index: int, size: int = 224) -> None:
    rng = random.Random(10_000 + index)
    base = tuple(40 + (index * 37 + k * 53) % 180 for k in range(3))
    img = Image.new("RGB", (size, size), base)
    draw = ImageDraw.Draw(img)
    for _ in range(4):
        x0, y0 = rng.randrange(size - 40), rng.randrange(size - 40)
        w, h = rng.randrange(20, 90), rng.randrange(20, 90)
        color = tuple(rng.randrange(256) for _ in range(3))
        draw.rectangle([x0, y0, min(x0 + w, size - 1), min(y0 + h, size - 1)], fill=color)
    img.save(path)


def _write_thumbnail(path: Path, color_name: str) -> None:
    img = Image.new("RGB", (32, 32), _RGB.get(color_name, (128, 128, 128)))
    draw = ImageDraw.Draw(img)
    draw.rectangle([8, 8, 23, 23], outline=(255, 255, 255))
    img.save(path)


_BOILERPLATE = "<div>Sign in | Cart | Menu | Search</div>"


def make_fixture_site(
    out_dir: Path | str,
    n_products: int = 24,
    seed: int = 0,
    site_id: str = "fixture",
) -> Path:
    """Write a synthetic snapshot site; returns the site directory.

    Default sizes give 30 pages: 1 homepage + 5 categories + 24 products.
    """
    site_dir = Path(out_dir)
    for sub in ("pages", "assets", "screenshots"):
        (site_dir / sub).mkdir(parents=True, exist_ok=True)
    products = fixture_products(n_products)

    by_category: dict[int, list[Product]] = {}
    for product in products:
        by_category.setdefault(product.category_index, []).append(product)
    category_ids = sorted(by_category)

    # Homepage: text-only links to the categories.
    links = "\n".join(
        f'<a href="cat{c}.html">{CATEGORIES[c]}</a>' for c in category_ids
    )
    home_html = f"""<html><body>
{_BOILERPLATE}
<h1>The Fixture Shop</h1>
<p>Quality knitwear and home goods at fair prices.</p>
{links}
</body></html>
"""
    (site_dir / "pages" / "home.html").write_text(home_html)

    # Category pages: image+alt links to products, plus a link home.
    for c in category_ids:
        entries = "\n".join(
            f'<a href="{p.page_id}.html"><img src="{p.image_name}" alt="{p.name}"></a>'
            for p in by_category[c]
        )
        html = f"""<html><body>
{_BOILERPLATE}
<h1>{CATEGORIES[c]}</h1>
{entries}
<a href="home.html">Back Home</a>
</body></html>
"""
        (site_dir / "pages" / f"cat{c}.html").write_text(html)

    # Product pages: facts plus links back to the category and to a sibling.
    captions = {}
    for i, product in enumerate(products):
        siblings = by_category[product.category_index]
        sibling = siblings[(siblings.index(product) + 1) % len(siblings)]
        related = ""
        if sibling.page_id != product.page_id:
            related = f'<a href="{sibling.page_id}.html">{sibling.name}</a>'
        html = f"""<html><body>
{_BOILERPLATE}
<h1>{product.name}</h1>
<img src="{product.image_name}" alt="{product.name}">
<p>Price: {product.price}</p>
<p>Sizes: {product.sizes}</p>
<p>Material: {product.material}</p>
<p>Color: {product.color}</p>
<p>In stock: yes</p>
{related}
<a href="cat{product.category_index}.html">More {CATEGORIES[product.category_index]}</a>
</body></html>
"""
        (site_dir / "pages" / f"{product.page_id}.html").write_text(html)
        _write_thumbnail(site_dir / "assets" / product.image_name, product.color)
        captions[product.image_name] = (
            f"a product photo of a {product.color} {product.material} "
            f"{CATEGORIES[product.category_index].lower()} item"
        )

    page_ids = ["home"] + [f"cat{c}" for c in category_ids] + [p.page_id for p in products]
    for index, page_id in enumerate(page_ids):
        _write_screenshot(site_dir / "screenshots" / f"{page_id}.png", index)

    (site_dir / "captions.json").write_text(json.dumps(captions, indent=2, sort_keys=True))
    (site_dir / "site.json").write_text(
        json.dumps(
            {
                "homepage_id": "home",
                "site_id": site_id,
                "captions": "captions.json",
                "stoplist": None,
                "click_selectors": [],
            },
            indent=2,
        )
    )
    return site_dir


def make_mock_llm_responses(
    site_dir: Path | str,
    n_products: int = 24,
    pairs_per_product: int = 3,
    subdir: str = "mock_llm",
) -> Path:
    """Write canned LLM replies (one file per product page) for offline QA generation."""
    out = Path(site_dir) / subdir
    out.mkdir(parents=True, exist_ok=True)
    for product in fixture_products(n_products):
        qa = [
            ("What is the price of the {n}?", product.price),
            ("What sizes are available for the {n}?", product.sizes),
            ("What material is the {n} made of?", product.material),
        ][:pairs_per_product]
        lines = []
        for k, (question, answer) in enumerate(qa, start=1):
            lines.append(f"Q{k}: {question.format(n=product.name)}")
            lines.append(f"A{k}: {answer}")
        (out / f"{product.page_id}.txt").write_text("\n".join(lines) + "\n")
    return out


def graph_from_adjacency(
    adjacency: dict[str, list[str]],
    homepage_id: str,
    site_id: str = "toy",
) -> NavGraph:
    """In-memory graph from page -> ordered target list; text-only buttons."""
    pages = []
    for page_id in adjacency:
        buttons = tuple(
            Button(
                button_id=f"{page_id}#btn{i}",
                description=f"go to {target}",
                image_ref="",
                target_page_id=target,
            )
            for i, target in enumerate(adjacency[page_id])
        )
        pages.append(
            WebPage(
                page_id=page_id,
                source_path="",
                screenshot_ref="",
                buttons=buttons,
                word_list=(page_id,),
                captions=(),
                raw_text=page_id,
            )
        )
    return build_graph(pages, homepage_id, site_id=site_id)
