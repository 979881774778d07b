import numpy as np
import pytest

from webnavkit.autodiff import Tensor
from webnavkit.errors import EmptyQuestion, NoCandidates, UndecodableImage
from webnavkit.model import (
    EOA,
    ModelConfig,
    Vocab,
    ans_loss,
    decode_answer,
    encode_button,
    encode_screenshot,
    eoa_token,
    flatten_params,
    init_params,
    init_state,
    load_checkpoint,
    load_image,
    nav_loss,
    nav_step,
    patchify,
    resize_image,
    save_checkpoint,
    set_flat_params,
    total_loss,
    vocab_from_dataset,
)
from webnavkit.sitegraph import Button

SMALL = ModelConfig(dim=16, heads=2, init_layers=1, nav_layers=2, decoder_layers=2,
                    ffn_mult=2, max_text_len=16, max_answer_len=8)


@pytest.fixture()
def vocab():
    return Vocab.build(["what is the price", "socks cost", "$12", "go stop"])


@pytest.fixture()
def params(vocab):
    return init_params(SMALL, len(vocab), seed=1)


def zero_params(vocab):
    p = init_params(SMALL, len(vocab), seed=0)
    for tensor in p.values():
        tensor.data = np.zeros_like(tensor.data)
    return p


# --- vocab -------------------------------------------------------------------

def test_vocab_reserved_and_deterministic():
    a = Vocab.build(["b a", "c"])
    b = Vocab.build(["c", "a b"])
    assert a.tokens == b.tokens
    assert a.tokens[:7] == ("[PAD]", "[CLS]", "[SEP]", "[EOA]", "[BOS]", "[EOS]", "[UNK]")
    assert len(set(a.tokens)) == len(a.tokens)


def test_vocab_unknown_tokens(vocab):
    ids = vocab.encode("what is the zzznever")
    assert ids[-1] == vocab.index["[UNK]"]
    assert vocab.decode(vocab.encode("socks cost")) == "socks cost"


def test_vocab_save_load(tmp_path, vocab):
    vocab.save(tmp_path / "vocab.txt")
    loaded = Vocab.load(tmp_path / "vocab.txt")
    assert loaded == vocab


# --- init_state ----------------------------------------------------------------

def test_init_state_shapes(vocab, params):
    s0, language = init_state("what is the price", "", params, vocab, SMALL)
    assert s0.shape == (1, SMALL.dim)
    assert language.shape == (4 + 1, SMALL.dim)  # Q tokens + [SEP]


def test_init_state_zero_params_symmetry(vocab):
    p = zero_params(vocab)
    s_a, _ = init_state("what is the price", "", p, vocab, SMALL)
    s_b, _ = init_state("socks cost go stop", "", p, vocab, SMALL)
    np.testing.assert_array_equal(s_a.data, s_b.data)


def test_init_state_deterministic(vocab, params):
    one = init_state("what is the price", "socks", params, vocab, SMALL)
    two = init_state("what is the price", "socks", params, vocab, SMALL)
    np.testing.assert_array_equal(one[0].data, two[0].data)
    np.testing.assert_array_equal(one[1].data, two[1].data)


def test_init_state_empty_question(vocab, params):
    with pytest.raises(EmptyQuestion):
        init_state("", "desc", params, vocab, SMALL)


# --- screenshot encoder -----------------------------------------------------------

def test_encode_screenshot_token_count(vocab, params):
    image = np.random.default_rng(0).random((224, 224, 3))
    tokens = encode_screenshot(image, params, SMALL)
    assert tokens.shape == (49, SMALL.dim)


def test_constant_image_tokens_differ_only_by_position(vocab, params):
    image = np.full((224, 224, 3), 0.5)
    tokens = encode_screenshot(image, params, SMALL)
    detokened = tokens.data - params["pos_patch"].data
    np.testing.assert_allclose(detokened, np.broadcast_to(detokened[0], detokened.shape),
                               atol=1e-6)


def test_resize_matches_block_mean_oracle(vocab, params):
    rng = np.random.default_rng(1)
    big = rng.random((448, 448, 3))
    # Oracle: direct 2x2 box downsample to 224.
    oracle = big.reshape(224, 2, 224, 2, 3).mean(axis=(1, 3))
    np.testing.assert_allclose(resize_image(big, 224), oracle, atol=1e-12)
    tokens = encode_screenshot(big, params, SMALL)
    oracle_tokens = encode_screenshot(oracle, params, SMALL)
    assert tokens.shape == (49, SMALL.dim)
    np.testing.assert_allclose(tokens.data, oracle_tokens.data, atol=1e-6)


def test_patchify_means(vocab):
    image = np.zeros((224, 224, 3))
    image[:32, :32, 0] = 1.0  # fills exactly the first patch's red channel
    patches = patchify(image, SMALL)
    assert patches.shape == (49, 3)
    np.testing.assert_allclose(patches[0], [1.0, 0.0, 0.0])
    np.testing.assert_allclose(patches[1:], 0.0)


def test_load_image_error(tmp_path):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    with pytest.raises(UndecodableImage):
        load_image(bad)


# --- button encoder ------------------------------------------------------------------

def test_button_text_only_uses_zero_image_half(vocab):
    p = init_params(SMALL, len(vocab), seed=2)
    d = SMALL.dim
    # button projection = sum of the two halves: W = [I; I], b = 0
    p["button_proj.w"].data = np.vstack([np.eye(d), np.eye(d)]).astype(np.float32)
    p["button_proj.b"].data = np.zeros(d, dtype=np.float32)
    button = Button("b", "socks cost", "", "t")
    token = encode_button(button, p, vocab, SMALL)
    ids = vocab.encode("socks cost")
    expected = p["tok_emb"].data[ids].mean(axis=0, keepdims=True)
    np.testing.assert_allclose(token.data, expected, atol=1e-6)


def test_identical_buttons_identical_tokens(vocab, params):
    a = encode_button(Button("x", "socks", "", "t"), params, vocab, SMALL)
    b = encode_button(Button("y", "socks", "", "u"), params, vocab, SMALL)
    np.testing.assert_array_equal(a.data, b.data)


def test_eoa_token_is_embedding_row(vocab, params):
    token = eoa_token(params, vocab)
    np.testing.assert_array_equal(token.data, params["tok_emb"].data[vocab.index[EOA]][None, :])


# --- nav_step ------------------------------------------------------------------------

def setup_step(vocab, params, n_buttons=3, seed=0):
    rng = np.random.default_rng(seed)
    s = Tensor(rng.standard_normal((1, SMALL.dim)).astype(np.float32))
    language = Tensor(rng.standard_normal((4, SMALL.dim)).astype(np.float32))
    shot = Tensor(rng.standard_normal((SMALL.n_patches, SMALL.dim)).astype(np.float32))
    buttons = Tensor(rng.standard_normal((n_buttons, SMALL.dim)).astype(np.float32))
    return s, language, shot, buttons


def test_nav_step_uniform_under_zero_action_head(vocab, params):
    params["action_proj.w"].data = np.zeros_like(params["action_proj.w"].data)
    params["action_proj.b"].data = np.zeros_like(params["action_proj.b"].data)
    s, language, shot, buttons = setup_step(vocab, params, n_buttons=4)
    _, p = nav_step(s, language, shot, buttons, params, SMALL)
    np.testing.assert_allclose(p.data, np.full(4, 0.25), atol=1e-6)


def test_nav_step_single_candidate(vocab, params):
    s, language, shot, buttons = setup_step(vocab, params, n_buttons=1)
    _, p = nav_step(s, language, shot, buttons, params, SMALL)
    np.testing.assert_allclose(p.data, [1.0])


def test_nav_step_probabilities_sum_to_one(vocab, params):
    s, language, shot, buttons = setup_step(vocab, params, n_buttons=5)
    _, p = nav_step(s, language, shot, buttons, params, SMALL)
    assert abs(float(p.data.sum()) - 1.0) < 1e-6
    assert (p.data >= 0).all()


def test_nav_step_no_candidates(vocab, params):
    s, language, shot, _ = setup_step(vocab, params)
    empty = Tensor(np.zeros((0, SMALL.dim), dtype=np.float32))
    with pytest.raises(NoCandidates):
        nav_step(s, language, shot, empty, params, SMALL)


def test_nav_step_permutation_equivariance(vocab, params):
    s, language, shot, buttons = setup_step(vocab, params, n_buttons=4, seed=3)
    _, p = nav_step(s, language, shot, buttons, params, SMALL)
    perm = np.array([2, 0, 3, 1])
    permuted = Tensor(buttons.data[perm])
    _, p_perm = nav_step(s, language, shot, permuted, params, SMALL)
    np.testing.assert_allclose(p_perm.data, p.data[perm], atol=1e-5)


def test_nav_step_language_tokens_unchanged(vocab, params):
    s, language, shot, buttons = setup_step(vocab, params)
    before = language.data.copy()
    nav_step(s, language, shot, buttons, params, SMALL)
    np.testing.assert_array_equal(language.data, before)  # bitwise identical


def test_nav_step_uses_language_tokens(vocab, params):
    s, language, shot, buttons = setup_step(vocab, params, seed=5)
    _, p = nav_step(s, language, shot, buttons, params, SMALL)
    zeroed = Tensor(np.zeros_like(language.data))
    _, p_zero = nav_step(s, zeroed, shot, buttons, params, SMALL)
    assert not np.allclose(p.data, p_zero.data)


def test_nav_step_argmax_invariant_under_masked_padding(vocab, params):
    s, language, shot, buttons = setup_step(vocab, params, n_buttons=3, seed=7)
    _, p = nav_step(s, language, shot, buttons, params, SMALL)
    rng = np.random.default_rng(11)
    padded = Tensor(
        np.vstack([buttons.data, rng.standard_normal((2, SMALL.dim)).astype(np.float32)])
    )
    mask = np.array([True, True, True, False, False])
    _, p_padded = nav_step(s, language, shot, padded, params, SMALL, candidate_mask=mask)
    assert p_padded.data[3] == 0.0 and p_padded.data[4] == 0.0
    assert int(np.argmax(p_padded.data)) == int(np.argmax(p.data))


# --- answering head --------------------------------------------------------------------

def test_decode_answer_respects_max_len(vocab, params):
    s = Tensor(np.random.default_rng(0).standard_normal((1, SMALL.dim)).astype(np.float32))
    text = decode_answer(s, params, vocab, SMALL, max_len=1)
    assert len(text.split()) <= 1


def test_decode_answer_deterministic(vocab, params):
    s = Tensor(np.random.default_rng(1).standard_normal((1, SMALL.dim)).astype(np.float32))
    assert decode_answer(s, params, vocab, SMALL) == decode_answer(s, params, vocab, SMALL)


# --- losses ------------------------------------------------------------------------------

def test_nav_loss_uniform_two_candidates():
    p = Tensor(np.array([0.5, 0.5]))
    for sampled in (0, 1):
        loss = nav_loss([p], [sampled], [1], eta=1.0)
        assert float(loss.data) == pytest.approx(2 * np.log(2), abs=1e-9)


def test_nav_loss_eta_zero_keeps_sampled_term_only():
    p = Tensor(np.array([0.25, 0.75]))
    loss = nav_loss([p], [0], [1], eta=0.0)
    assert float(loss.data) == pytest.approx(-np.log(0.25), abs=1e-9)


def test_nav_loss_certain_teacher_is_zero():
    p = Tensor(np.array([1.0]))
    loss = nav_loss([p], [0], [0], eta=1.0)
    assert float(loss.data) == pytest.approx(0.0, abs=1e-12)


def test_nav_loss_index_out_of_range():
    p = Tensor(np.array([0.5, 0.5]))
    with pytest.raises(IndexError):
        nav_loss([p], [2], [0], eta=1.0)


def test_ans_loss_uniform_head():
    logits = Tensor(np.zeros((3, 10)))
    loss = ans_loss(logits, [1, 2, 3])
    assert float(loss.data) == pytest.approx(3 * np.log(10), abs=1e-9)


def test_ans_loss_confident_gold_is_zero():
    logits_data = np.zeros((2, 5))
    logits_data[0, 3] = 1000.0
    logits_data[1, 1] = 1000.0
    loss = ans_loss(Tensor(logits_data), [3, 1])
    assert float(loss.data) == pytest.approx(0.0, abs=1e-6)


def test_ans_loss_order_sensitive():
    rng = np.random.default_rng(2)
    logits = Tensor(rng.standard_normal((2, 6)))
    a = float(ans_loss(logits, [1, 4]).data)
    b = float(ans_loss(logits, [4, 1]).data)
    assert a != pytest.approx(b)


def test_total_loss_weighting():
    l_nav = Tensor(np.array(1.0))
    l_ans = Tensor(np.array(2.0))
    assert float(total_loss(l_nav, l_ans, 0.0).data) == 1.0
    assert float(total_loss(l_nav, l_ans, 1.0).data) == 3.0
    assert float(total_loss(l_nav, l_ans, 10.0).data) == 21.0


# --- flatten / checkpoints -----------------------------------------------------------------

def test_flatten_roundtrip(vocab, params):
    flat = flatten_params(params)
    doubled = flat * 2.0
    set_flat_params(params, doubled)
    np.testing.assert_allclose(flatten_params(params), doubled)


def test_checkpoint_roundtrip(tmp_path, vocab, params):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, params, SMALL, vocab)
    loaded_params, loaded_config, loaded_vocab = load_checkpoint(path)
    assert loaded_config == SMALL
    assert loaded_vocab.tokens == vocab.tokens
    np.testing.assert_array_equal(flatten_params(loaded_params), flatten_params(params))


def test_vocab_from_dataset(fixture_graph):
    from webnavkit.simulator import EpisodeRecord

    record = EpisodeRecord(
        record_id="r", site_id="s", question="what is the price",
        description="", answer="$9.00",
        path=("home", "cat0", "product00"),
    )
    vocab = vocab_from_dataset([record], fixture_graph)
    assert "$9.00" in vocab.tokens
    assert "price:" in vocab.tokens or "price" in vocab.tokens
