"""Toy navigation-and-answering network, trained from scratch.

Components:

* a question/description encoder producing the initial state token (at
  [CLS]) and the language tokens, which are computed once per episode and
  reused as attention keys/values at every later step;
* a screenshot encoder: resize to 224x224, split into a 7x7 patch grid,
  per-channel patch means, linear projection to the model width, learned
  2-D position embeddings;
* a button encoder: mean description embedding and pooled patch projection
  of the button image (either half is the zero vector when absent),
  concatenated and projected back to the model width; the stop candidate
  uses the learned [EOA] embedding;
* a navigation core whose queries are [state; screenshot; buttons] and
  whose keys/values additionally include the frozen language tokens;
  action probabilities come from a scaled dot product between the
  projected state and the final-layer button tokens;
* an answering head: a causal transformer decoder cross-attending to the
  single final state token, decoded greedily.

Everything runs on the kit's numpy reverse-mode tape, so analytic
gradients of the combined loss are available for every parameter.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import autodiff as ad
from .autodiff import Tensor
from .errors import EmptyQuestion, NoCandidates, UndecodableImage
from .sitegraph import Button, NavGraph, WebPage, tokenize
from .simulator import EpisodeRecord

PAD, CLS, SEP, EOA, BOS, EOS, UNK = "[PAD]", "[CLS]", "[SEP]", "[EOA]", "[BOS]", "[EOS]", "[UNK]"
RESERVED_TOKENS = (PAD, CLS, SEP, EOA, BOS, EOS, UNK)


# --- vocabulary ------------------------------------------------------------

@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]
    index: dict[str, int]

    @staticmethod
    def build(texts: Iterable[str]) -> "Vocab":
        """Deterministic vocabulary: reserved tokens, then sorted corpus tokens."""
        seen = set()
        for text in texts:
            seen.update(tokenize(text))
        tokens = RESERVED_TOKENS + tuple(sorted(seen - set(RESERVED_TOKENS)))
        return Vocab(tokens=tokens, index={t: i for i, t in enumerate(tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, text: str) -> list[int]:
        unk = self.index[UNK]
        return [self.index.get(t, unk) for t in tokenize(text)]

    def decode(self, ids: Sequence[int]) -> str:
        reserved = set(RESERVED_TOKENS)
        return " ".join(
            self.tokens[i] for i in ids if 0 <= i < len(self.tokens) and self.tokens[i] not in reserved
        )

    def save(self, path: Path | str) -> None:
        Path(path).write_text("\n".join(self.tokens) + "\n")

    @staticmethod
    def load(path: Path | str) -> "Vocab":
        tokens = tuple(Path(path).read_text().splitlines())
        return Vocab(tokens=tokens, index={t: i for i, t in enumerate(tokens)})


def vocab_from_dataset(records: Sequence[EpisodeRecord], graph: NavGraph) -> Vocab:
    """Vocabulary over the training-split text plus the site's page content."""
    texts = []
    for record in records:
        texts += [record.question, record.description, record.answer]
    for page in graph.pages.values():
        texts.append(" ".join(page.word_list))
        texts += [b.description for b in page.buttons]
    return Vocab.build(texts)


# --- configuration and parameters -------------------------------------------

@dataclass(frozen=True)
class ModelConfig:
    dim: int = 64
    heads: int = 4
    init_layers: int = 2
    nav_layers: int = 2
    decoder_layers: int = 6
    ffn_mult: int = 4
    max_text_len: int = 64
    max_answer_len: int = 40
    patch_grid: int = 7
    image_size: int = 224
    dtype: str = "float32"

    @property
    def np_dtype(self):
        return np.dtype(self.dtype)

    @property
    def n_patches(self) -> int:
        return self.patch_grid * self.patch_grid


def _block_names(prefix: str, cross: bool) -> list[tuple[str, tuple[int, ...] | str]]:
    names: list[tuple[str, tuple[int, ...] | str]] = []
    attns = ["attn"] + (["xattn"] if cross else [])
    for a in attns:
        for m in ("wq", "wk", "wv", "wo"):
            names.append((f"{prefix}{a}.{m}", "dd"))
        for m in ("bq", "bk", "bv", "bo"):
            names.append((f"{prefix}{a}.{m}", "d"))
    n_ln = 3 if cross else 2
    for i in range(1, n_ln + 1):
        names.append((f"{prefix}ln{i}.g", "ones"))
        names.append((f"{prefix}ln{i}.b", "d"))
    names.append((f"{prefix}ffn.w1", "dF"))
    names.append((f"{prefix}ffn.b1", "F"))
    names.append((f"{prefix}ffn.w2", "Fd"))
    names.append((f"{prefix}ffn.b2", "d"))
    return names


def init_params(config: ModelConfig, vocab_size: int, seed: int = 0) -> dict[str, Tensor]:
    """Fresh parameter set; every tensor is a leaf on the autodiff tape."""
    rng = np.random.default_rng(seed)
    d, f = config.dim, config.dim * config.ffn_mult
    shapes: dict[str, tuple[int, ...] | str] = {
        "tok_emb": (vocab_size, d),
        "pos_text": (config.max_text_len, d),
        "pos_patch": (config.n_patches, d),
        "pos_ans": (config.max_answer_len + 1, d),
        "patch_proj.w": (3, d),
        "patch_proj.b": "d",
        "button_proj.w": (2 * d, d),
        "button_proj.b": "d",
        "action_proj.w": "dd",
        "action_proj.b": "d",
        "out_proj.w": (d, vocab_size),
        "out_proj.b": (vocab_size,),
    }
    for i in range(config.init_layers):
        shapes.update(dict(_block_names(f"init.{i}.", cross=False)))
    for i in range(config.nav_layers):
        shapes.update(dict(_block_names(f"nav.{i}.", cross=False)))
    for i in range(config.decoder_layers):
        shapes.update(dict(_block_names(f"dec.{i}.", cross=True)))

    params: dict[str, Tensor] = {}
    for name in sorted(shapes):
        spec = shapes[name]
        if spec == "d":
            arr = np.zeros(d)
        elif spec == "F":
            arr = np.zeros(f)
        elif spec == "ones":
            arr = np.ones(d)
        elif spec == "dd":
            arr = rng.normal(0.0, 0.02, size=(d, d))
        elif spec == "dF":
            arr = rng.normal(0.0, 0.02, size=(d, f))
        elif spec == "Fd":
            arr = rng.normal(0.0, 0.02, size=(f, d))
        elif name.endswith(".b") or name.endswith("_b"):
            arr = np.zeros(spec)
        else:
            arr = rng.normal(0.0, 0.02, size=spec)
        params[name] = Tensor(arr.astype(config.np_dtype))
    return params


def param_layout(params: dict[str, Tensor]) -> list[tuple[str, tuple[int, ...]]]:
    return [(name, params[name].data.shape) for name in sorted(params)]


def flatten_params(params: dict[str, Tensor]) -> np.ndarray:
    return np.concatenate([params[name].data.reshape(-1) for name in sorted(params)])


def set_flat_params(params: dict[str, Tensor], vector: np.ndarray) -> None:
    offset = 0
    for name in sorted(params):
        tensor = params[name]
        size = tensor.data.size
        tensor.data = vector[offset:offset + size].reshape(tensor.data.shape).astype(tensor.data.dtype)
        offset += size
    assert offset == vector.size


def zero_grads(params: dict[str, Tensor]) -> None:
    for tensor in params.values():
        tensor.grad = None


def cast_params(params: dict[str, Tensor], dtype) -> dict[str, Tensor]:
    return {name: Tensor(tensor.data.astype(dtype)) for name, tensor in params.items()}


# --- shared layers ------------------------------------------------------------

def linear(x: Tensor, params: dict[str, Tensor], prefix: str) -> Tensor:
    return ad.add(ad.matmul(x, params[prefix + ".w"]), params[prefix + ".b"])


def layer_norm(x: Tensor, params: dict[str, Tensor], prefix: str, eps: float = 1e-5) -> Tensor:
    mu = ad.tmean(x, axis=-1, keepdims=True)
    centered = ad.add(x, ad.mul(mu, -1.0))
    var = ad.tmean(ad.mul(centered, centered), axis=-1, keepdims=True)
    inv = ad.power(ad.add(var, eps), -0.5)
    return ad.add(ad.mul(ad.mul(centered, inv), params[prefix + ".g"]), params[prefix + ".b"])


def attention(
    x: Tensor,
    kv: Tensor,
    params: dict[str, Tensor],
    prefix: str,
    heads: int,
    mask: Optional[np.ndarray] = None,
) -> Tensor:
    """Multi-head attention; ``mask`` (nq, nk) is added to the scores."""
    nq, d = x.shape
    nk = kv.shape[0]
    dk = d // heads

    def split(t: Tensor) -> Tensor:  # (n, d) -> (heads, n, dk)
        return ad.swapaxes(ad.reshape(t, (-1, heads, dk)), 0, 1)

    q = split(ad.add(ad.matmul(x, params[prefix + ".wq"]), params[prefix + ".bq"]))
    k = split(ad.add(ad.matmul(kv, params[prefix + ".wk"]), params[prefix + ".bk"]))
    v = split(ad.add(ad.matmul(kv, params[prefix + ".wv"]), params[prefix + ".bv"]))
    scores = ad.mul(ad.matmul(q, ad.swapaxes(k, -1, -2)), 1.0 / float(np.sqrt(dk)))
    if mask is not None:
        scores = ad.add(scores, mask[None, :, :].astype(x.data.dtype))
    weights = ad.softmax(scores, axis=-1)
    context = ad.reshape(ad.swapaxes(ad.matmul(weights, v), 0, 1), (nq, d))
    return ad.add(ad.matmul(context, params[prefix + ".wo"]), params[prefix + ".bo"])


def _ffn(x: Tensor, params: dict[str, Tensor], prefix: str) -> Tensor:
    hidden = ad.gelu(ad.add(ad.matmul(x, params[prefix + ".w1"]), params[prefix + ".b1"]))
    return ad.add(ad.matmul(hidden, params[prefix + ".w2"]), params[prefix + ".b2"])


def encoder_block(
    x: Tensor,
    params: dict[str, Tensor],
    prefix: str,
    heads: int,
    kv_extra: Optional[Tensor] = None,
    mask: Optional[np.ndarray] = None,
) -> Tensor:
    kv = x if kv_extra is None else ad.concat([x, kv_extra], axis=0)
    x = layer_norm(ad.add(x, attention(x, kv, params, prefix + "attn", heads, mask)), params, prefix + "ln1")
    x = layer_norm(ad.add(x, _ffn(x, params, prefix + "ffn")), params, prefix + "ln2")
    return x


def decoder_block(
    x: Tensor,
    memory: Tensor,
    params: dict[str, Tensor],
    prefix: str,
    heads: int,
    causal_mask: np.ndarray,
) -> Tensor:
    x = layer_norm(
        ad.add(x, attention(x, x, params, prefix + "attn", heads, causal_mask)),
        params, prefix + "ln1",
    )
    x = layer_norm(
        ad.add(x, attention(x, memory, params, prefix + "xattn", heads)),
        params, prefix + "ln2",
    )
    x = layer_norm(ad.add(x, _ffn(x, params, prefix + "ffn")), params, prefix + "ln3")
    return x


# --- images ---------------------------------------------------------------------

def load_image(path: Path | str) -> np.ndarray:
    """Decode an image file to a float (H, W, 3) array in [0, 1]."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise UndecodableImage(str(path)) from exc


def _resize_axis(image: np.ndarray, new_len: int, axis: int) -> np.ndarray:
    old_len = image.shape[axis]
    if old_len == new_len:
        return image
    if old_len % new_len == 0:  # exact block mean
        factor = old_len // new_len
        shape = list(image.shape)
        shape[axis] = new_len
        shape.insert(axis + 1, factor)
        return image.reshape(shape).mean(axis=axis + 1)
    if new_len % old_len == 0:  # exact integer upscale
        return np.repeat(image, new_len // old_len, axis=axis)
    centers = (np.arange(new_len) + 0.5) * old_len / new_len - 0.5
    low = np.clip(np.floor(centers).astype(int), 0, old_len - 1)
    high = np.clip(low + 1, 0, old_len - 1)
    frac = np.clip(centers - low, 0.0, 1.0)
    lo = np.take(image, low, axis=axis)
    hi = np.take(image, high, axis=axis)
    shape = [1] * image.ndim
    shape[axis] = new_len
    return lo + (hi - lo) * frac.reshape(shape)


def resize_image(image: np.ndarray, size: int) -> np.ndarray:
    """Area-exact resize when sizes divide evenly, bilinear otherwise."""
    return _resize_axis(_resize_axis(image, size, 0), size, 1)


def patchify(image: np.ndarray, config: ModelConfig) -> np.ndarray:
    """(H, W, 3) image -> (grid^2, 3) per-patch per-channel means."""
    image = resize_image(image, config.image_size)
    g = config.patch_grid
    ps = config.image_size // g
    patches = image.reshape(g, ps, g, ps, 3).mean(axis=(1, 3))
    return patches.reshape(g * g, 3)


def encode_screenshot(image: np.ndarray, params: dict[str, Tensor], config: ModelConfig) -> Tensor:
    """Patch tokens with 2-D position embeddings; shape (grid^2, dim)."""
    raw = Tensor(patchify(image, config).astype(params["tok_emb"].data.dtype))
    return ad.add(linear(raw, params, "patch_proj"), params["pos_patch"])


def screenshot_tokens_from_patches(raw_patches: np.ndarray, params: dict[str, Tensor]) -> Tensor:
    raw = Tensor(raw_patches.astype(params["tok_emb"].data.dtype))
    return ad.add(linear(raw, params, "patch_proj"), params["pos_patch"])


# --- encoders -----------------------------------------------------------------------

def init_state(
    question: str,
    description: str,
    params: dict[str, Tensor],
    vocab: Vocab,
    config: ModelConfig,
) -> tuple[Tensor, Tensor]:
    """Encode [CLS] Q [SEP] D; return (state at [CLS], language tokens)."""
    q_ids = vocab.encode(question)
    if not q_ids:
        raise EmptyQuestion(question)
    ids = [vocab.index[CLS]] + q_ids + [vocab.index[SEP]] + vocab.encode(description)
    ids = ids[: config.max_text_len]
    x = ad.add(ad.embedding(params["tok_emb"], np.array(ids)), params["pos_text"][: len(ids)])
    for i in range(config.init_layers):
        x = encoder_block(x, params, f"init.{i}.", config.heads)
    return x[0:1, :], x[1:, :]


def _button_token(
    description: str,
    raw_patches: Optional[np.ndarray],
    params: dict[str, Tensor],
    vocab: Vocab,
    config: ModelConfig,
) -> Tensor:
    dtype = params["tok_emb"].data.dtype
    ids = vocab.encode(description)
    if ids:
        text_half = ad.tmean(ad.embedding(params["tok_emb"], np.array(ids)), axis=0, keepdims=True)
    else:
        text_half = Tensor(np.zeros((1, config.dim), dtype=dtype))
    if raw_patches is not None:
        projected = linear(Tensor(raw_patches.astype(dtype)), params, "patch_proj")
        image_half = ad.tmean(projected, axis=0, keepdims=True)
    else:
        image_half = Tensor(np.zeros((1, config.dim), dtype=dtype))
    return linear(ad.concat([text_half, image_half], axis=1), params, "button_proj")


def encode_button(
    button: Button,
    params: dict[str, Tensor],
    vocab: Vocab,
    config: ModelConfig,
    image: Optional[np.ndarray] = None,
) -> Tensor:
    """One (1, dim) token per button; absent halves enter as zero vectors."""
    raw = patchify(image, config) if image is not None else None
    return _button_token(button.description, raw, params, vocab, config)


def eoa_token(params: dict[str, Tensor], vocab: Vocab) -> Tensor:
    return ad.embedding(params["tok_emb"], np.array([vocab.index[EOA]]))


# --- navigation step -------------------------------------------------------------------

def nav_step(
    s_prev: Tensor,
    language_tokens: Tensor,
    screenshot_tokens: Tensor,
    button_tokens: Tensor,
    params: dict[str, Tensor],
    config: ModelConfig,
    candidate_mask: Optional[np.ndarray] = None,
) -> tuple[Tensor, Tensor]:
    """One decision step; returns (new state (1, dim), action probabilities).

    Queries are [state; screenshot tokens; button tokens]; the language
    tokens contribute keys/values only and are never updated.  Action
    probabilities are the softmax of scaled dot products between the
    projected state and the final-layer button tokens; ``candidate_mask``
    (True = keep) removes padding candidates from the softmax.
    """
    n_candidates = button_tokens.shape[0]
    if n_candidates == 0:
        raise NoCandidates("need at least the stop candidate")
    x = ad.concat([s_prev, screenshot_tokens, button_tokens], axis=0)
    for i in range(config.nav_layers):
        x = encoder_block(x, params, f"nav.{i}.", config.heads, kv_extra=language_tokens)
    state = x[0:1, :]
    candidates = x[x.shape[0] - n_candidates :, :]
    projected = linear(state, params, "action_proj")
    scores = ad.mul(
        ad.matmul(projected, ad.swapaxes(candidates, 0, 1)),
        1.0 / float(np.sqrt(config.dim)),
    )
    if candidate_mask is not None:
        bias = np.where(candidate_mask, 0.0, -np.inf).astype(scores.data.dtype)
        scores = ad.add(scores, bias[None, :])
    probs = ad.reshape(ad.softmax(scores, axis=-1), (n_candidates,))
    return state, probs


# --- answering head -----------------------------------------------------------------------

def _causal_mask(length: int) -> np.ndarray:
    mask = np.zeros((length, length))
    mask[np.triu_indices(length, k=1)] = -np.inf
    return mask


def decoder_logits(
    input_ids: Sequence[int],
    memory: Tensor,
    params: dict[str, Tensor],
    config: ModelConfig,
) -> Tensor:
    """Teacher-forced decoder pass; returns (len, vocab) logits."""
    ids = np.asarray(input_ids)
    x = ad.add(ad.embedding(params["tok_emb"], ids), params["pos_ans"][: len(ids)])
    mask = _causal_mask(len(ids))
    for i in range(config.decoder_layers):
        x = decoder_block(x, memory, params, f"dec.{i}.", config.heads, mask)
    return ad.add(ad.matmul(x, params["out_proj.w"]), params["out_proj.b"])


def decode_answer(
    s_final: Tensor,
    params: dict[str, Tensor],
    vocab: Vocab,
    config: ModelConfig,
    max_len: Optional[int] = None,
) -> str:
    """Greedy autoregressive decoding from [BOS] until [EOS] or max_len words."""
    limit = config.max_answer_len if max_len is None else max_len
    eos = vocab.index[EOS]
    ids = [vocab.index[BOS]]
    out: list[int] = []
    for _ in range(limit):
        logits = decoder_logits(ids, s_final, params, config)
        nxt = int(np.argmax(logits.data[-1]))
        if nxt == eos:
            break
        out.append(nxt)
        ids.append(nxt)
        if len(ids) > config.max_answer_len:
            break
    return vocab.decode(out)


# --- losses ---------------------------------------------------------------------------------

def nav_loss(
    p_list: Sequence[Tensor],
    sampled_actions: Sequence[int],
    teacher_actions: Sequence[int],
    eta: float,
) -> Tensor:
    """Cross-entropy over the episode's decisions.

    Sums -log p[sampled] - eta * log p[teacher] per step; the rollout
    itself follows the teacher actions.
    """
    if not (len(p_list) == len(sampled_actions) == len(teacher_actions)):
        raise IndexError("p_list, sampled and teacher actions must align")
    total: Tensor | None = None
    for p, sampled, teacher in zip(p_list, sampled_actions, teacher_actions):
        n = p.shape[0]
        if not (0 <= sampled < n and 0 <= teacher < n):
            raise IndexError(f"action index out of range for {n} candidates")
        term = ad.mul(ad.log(p[sampled]), -1.0)
        if eta != 0.0:
            term = ad.add(term, ad.mul(ad.log(p[teacher]), -eta))
        total = term if total is None else ad.add(total, term)
    assert total is not None
    return total


def ans_loss(logits: Tensor, gold_ids: Sequence[int]) -> Tensor:
    """Teacher-forced negative log-likelihood of the gold tokens."""
    gold = np.asarray(gold_ids)
    assert logits.shape[0] == len(gold)
    logp = ad.log_softmax(logits, axis=-1)
    return ad.mul(ad.tsum(ad.take_rows(logp, gold)), -1.0)


def total_loss(l_nav: Tensor, l_ans: Tensor, lam: float) -> Tensor:
    return ad.add(l_nav, ad.mul(l_ans, lam)) if lam != 0.0 else l_nav


# --- episode forward --------------------------------------------------------------------------

class SiteAssets:
    """Patchified screenshots and button thumbnails, cached per site."""

    def __init__(self, site_dir: Optional[Path | str], config: ModelConfig):
        self.site_dir = Path(site_dir) if site_dir else None
        self.config = config
        self._cache: dict[str, Optional[np.ndarray]] = {}

    def _patches(self, ref: str) -> Optional[np.ndarray]:
        if not ref or self.site_dir is None:
            return None
        if ref not in self._cache:
            path = self.site_dir / ref
            if path.exists():
                self._cache[ref] = patchify(load_image(path), self.config)
            else:
                self._cache[ref] = None
        return self._cache[ref]

    def screenshot_patches(self, page: WebPage) -> np.ndarray:
        patches = self._patches(page.screenshot_ref)
        if patches is None:
            return np.zeros((self.config.n_patches, 3))
        return patches

    def button_image_patches(self, button: Button) -> Optional[np.ndarray]:
        return self._patches(button.image_ref)


def page_button_tokens(
    page: WebPage,
    params: dict[str, Tensor],
    vocab: Vocab,
    config: ModelConfig,
    assets: SiteAssets,
) -> Tensor:
    """Candidate tokens for a page: its buttons in order, then [EOA]."""
    tokens = [
        _button_token(
            button.description, assets.button_image_patches(button), params, vocab, config
        )
        for button in page.buttons
    ]
    tokens.append(eoa_token(params, vocab))
    return ad.concat(tokens, axis=0)


@dataclass
class EpisodeForward:
    loss: Tensor
    l_nav: Tensor
    l_ans: Tensor
    p_list: list[Tensor]
    sampled_actions: list[int]
    teacher_actions: list[int]
    final_state: Tensor


def episode_loss(
    record: EpisodeRecord,
    graph: NavGraph,
    params: dict[str, Tensor],
    vocab: Vocab,
    config: ModelConfig,
    assets: SiteAssets,
    eta: float = 1.0,
    lam: float = 1.0,
    rng: Optional[np.random.Generator] = None,
    sampled_actions: Optional[Sequence[int]] = None,
) -> EpisodeForward:
    """Teacher-forced episode pass computing the combined loss.

    The rollout follows the ground-truth path; at each page the teacher
    action is the first button leading to the next gold page, and [EOA] at
    the target.  Sampled actions are drawn from the step distributions
    unless given explicitly (gradient checks pass them in fixed).
    """
    s, language_tokens = init_state(record.question, record.description, params, vocab, config)
    generator = rng if rng is not None else np.random.default_rng(0)
    p_list: list[Tensor] = []
    teacher_actions: list[int] = []
    drawn: list[int] = []
    for step_index, page_id in enumerate(record.path):
        page = graph.page(page_id)
        shot = screenshot_tokens_from_patches(assets.screenshot_patches(page), params)
        buttons = page_button_tokens(page, params, vocab, config, assets)
        s, p = nav_step(s, language_tokens, shot, buttons, params, config)
        if step_index < len(record.path) - 1:
            nxt = record.path[step_index + 1]
            teacher = next(
                i for i, b in enumerate(page.buttons) if b.target_page_id == nxt
            )
        else:
            teacher = len(page.buttons)  # the [EOA] candidate
        p_list.append(p)
        teacher_actions.append(teacher)
        if sampled_actions is None:
            weights = np.asarray(p.data, dtype=np.float64)
            weights = weights / weights.sum()
            drawn.append(int(generator.choice(len(weights), p=weights)))
    sampled = list(sampled_actions) if sampled_actions is not None else drawn
    l_nav = nav_loss(p_list, sampled, teacher_actions, eta)

    gold = vocab.encode(record.answer)[: config.max_answer_len - 1] + [vocab.index[EOS]]
    input_ids = [vocab.index[BOS]] + gold[:-1]
    logits = decoder_logits(input_ids, s, params, config)
    l_ans = ans_loss(logits, gold)
    return EpisodeForward(
        loss=total_loss(l_nav, l_ans, lam),
        l_nav=l_nav,
        l_ans=l_ans,
        p_list=p_list,
        sampled_actions=sampled,
        teacher_actions=teacher_actions,
        final_state=s,
    )


# --- checkpoints --------------------------------------------------------------------------------

CHECKPOINT_MAGIC = "webnavkit-checkpoint-v1"


def save_checkpoint(
    path: Path | str,
    params: dict[str, Tensor],
    config: ModelConfig,
    vocab: Vocab,
) -> None:
    """Single-file checkpoint: one JSON header line + raw parameter bytes."""
    header = {
        "format": CHECKPOINT_MAGIC,
        "config": asdict(config),
        "vocab": list(vocab.tokens),
        "layout": [[name, list(shape)] for name, shape in param_layout(params)],
        "dtype": str(params[sorted(params)[0]].data.dtype),
    }
    flat = flatten_params(params)
    with Path(path).open("wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(flat.tobytes())


def load_checkpoint(path: Path | str) -> tuple[dict[str, Tensor], ModelConfig, Vocab]:
    with Path(path).open("rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format") != CHECKPOINT_MAGIC:
            raise ValueError(f"not a checkpoint file: {path}")
        blob = fh.read()
    config = ModelConfig(**header["config"])
    vocab = Vocab(tokens=tuple(header["vocab"]),
                  index={t: i for i, t in enumerate(header["vocab"])})
    flat = np.frombuffer(blob, dtype=np.dtype(header["dtype"]))
    params: dict[str, Tensor] = {}
    offset = 0
    for name, shape in header["layout"]:
        size = int(np.prod(shape)) if shape else 1
        params[name] = Tensor(flat[offset:offset + size].reshape(shape).copy())
        offset += size
    assert offset == flat.size
    return params, config, vocab
