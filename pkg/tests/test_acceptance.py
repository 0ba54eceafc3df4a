"""Release gate: every headline guarantee of the package, each pinned at its
stated tolerance against an oracle computed independently inside the test.

Each test prints one [PASS] line with the measured statistic; a failure is a
plain pytest failure. Runtime-bounded checks measure wall time themselves.
"""

from __future__ import annotations

import itertools
import math
import random
import time

import numpy as np

from hopforge.context import Fragment, order_fragments, pack, render_fragment
from hopforge.evidence import EvidenceCandidate, commit
from hopforge.index import ExactIndex, build_index
from hopforge.metrics import (
    binary_match,
    multichoice_em,
    numeracy_f1,
    paired_bootstrap,
    sentence_em_f1,
)
from hopforge.pipeline import IteratorPipeline, PipelineConfig
from hopforge.qa_factory import (
    NO_ANSWER,
    build_goldplusdistractors,
    build_selfsupervised,
    build_unanswerable,
)
from hopforge.sampler import Schedule, TaskSpec, reduce_dev, run_schedule
from hopforge.scorers import (
    EvidenceScore,
    document_text,
    serialize_evidence_input,
    serialize_reranker_input,
    serialize_retriever_query,
)
from hopforge.train_builder import (
    PathParagraph,
    ReasoningPath,
    expand_path,
    retrieval_loss,
)

from helpers import build_chain_world


# --------------------------------------------------------------------------
# contrastive objective


def _naive_softmax(q: list[float], pos: list[float], negs: list[list[float]]):
    # deliberately shift-free: plain exp over raw logits
    def dot(a, b):
        return sum(x * y for x, y in zip(a, b))

    logits = [dot(q, pos)] + [dot(q, n) for n in negs]
    exps = [math.exp(x) for x in logits]
    prob = exps[0] / sum(exps)
    return prob, -math.log(prob)


def test_contrastive_loss_matches_bruteforce_softmax():
    start = time.perf_counter()
    rng = random.Random(7)
    worst = 0.0
    for _ in range(1000):
        dim = rng.randint(1, 16)
        q = [rng.uniform(-2, 2) for _ in range(dim)]
        pos = [rng.uniform(-2, 2) for _ in range(dim)]
        negs = [
            [rng.uniform(-2, 2) for _ in range(dim)]
            for _ in range(rng.randint(0, 19))
        ]
        prob, loss = retrieval_loss(q, pos, negs)
        ref_prob, ref_loss = _naive_softmax(q, pos, negs)
        worst = max(worst, abs(prob - ref_prob), abs(loss - ref_loss))
    assert worst <= 1e-9

    # unit logit gap: one negative orthogonal to the query
    prob, loss = retrieval_loss([1.0, 0.0], [1.0, 0.0], [[0.0, 1.0]])
    expected = math.e / (math.e + 1.0)
    assert abs(prob - expected) <= 1e-12
    assert abs(loss + math.log(expected)) <= 1e-12
    assert round(prob, 5) == 0.73106
    assert abs(loss - 0.31326) < 5e-6

    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(
        f"[PASS] contrastive loss: 1000 instances, worst |delta| {worst:.2e}, "
        f"unit-gap prob {prob:.5f}, {elapsed:.2f}s"
    )


# --------------------------------------------------------------------------
# oracle end-to-end retrieval


def test_planted_chains_full_recall_and_hop_selection():
    start = time.perf_counter()
    world = build_chain_world(n_chains=20, total_paragraphs=200)
    index = ExactIndex(build_index(world.store, world.embedder))
    pipeline = IteratorPipeline(
        store=world.store,
        index=index,
        embedder=world.embedder,
        paragraph_scorer=world.paragraph_scorer,
        evidence_scorer=world.evidence_scorer,
        config=PipelineConfig(t_max=4, k=5, workers=2),
    )
    for chain in world.chains:
        result = pipeline.run_query(chain.question)
        found = {(s.title, s.text) for s in result.final.sentences}
        missing = chain.gold_sentences - found
        assert not missing, f"{chain.question}: missing {missing}"
        assert result.final.t == len(chain.para_ids) - 1
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(
        f"[PASS] planted chains: 20/20 queries at sentence recall 1.0 with the "
        f"right final hop, {elapsed:.2f}s"
    )


# --------------------------------------------------------------------------
# commit selection rules


GRID = (0.0, 0.05, 0.11, 0.5, 0.9)


def _reference_commit(vals: tuple[float, ...]) -> list[int]:
    order = sorted(range(len(vals)), key=lambda i: (-vals[i], i))
    kept = [i for i in order if vals[i] > 0.1][:5]
    if len(kept) < 2:
        kept = order[:2]
    return kept


def test_commit_rules_exhaustive_grid():
    cases = 0
    fallbacks = 0
    caps = 0
    for n in range(1, 8):
        for vals in itertools.product(GRID, repeat=n):
            candidates = [
                EvidenceCandidate(
                    para_id=f"c{i}",
                    sent_idx=0,
                    title="T",
                    text="s",
                    p=v,
                    available=v,
                )
                for i, v in enumerate(vals)
            ]
            state = commit(0, candidates, EvidenceScore(e=0.5, s_e=list(vals)))
            got = [int(s.para_id[1:]) for s in state.sentences]
            expected = _reference_commit(vals)
            assert got == expected, f"{vals}: {got} != {expected}"
            for s in state.sentences:
                assert s.combined == vals[int(s.para_id[1:])]
            qualifying = sum(1 for v in vals if v > 0.1)
            fallbacks += qualifying < 2
            caps += qualifying > 5
            cases += 1
    assert cases == sum(len(GRID) ** n for n in range(1, 8))
    assert fallbacks and caps  # both rules genuinely exercised
    print(
        f"[PASS] commit rules: {cases} score vectors agree with brute force "
        f"({fallbacks} fallback, {caps} capped)"
    )


# --------------------------------------------------------------------------
# context packing


_WORDS = (
    "alder birch cedar drift ember fjord grove heath inlet juniper knoll larch "
    "marsh nettle osier pine quarry ridge spruce thicket upland vale willow"
).split()

_TITLES = ("Alder", "Birch", "Cedar", "Drift", "Ember", "Fjord", "Grove", "Heath")


def _make_fragment(rng: random.Random, idx: int, n_words: int) -> Fragment:
    p_val, s_max = rng.random(), rng.random()
    start = rng.randint(0, 5)
    return Fragment(
        title=rng.choice(_TITLES),
        text=" ".join(rng.choice(_WORDS) for _ in range(n_words)),
        para_id=f"p{idx:03d}",
        order_score=0.5 * p_val + 0.5 * s_max,
        start_idx=start,
        end_idx=start + rng.randint(0, 2),
    )


def test_packing_budget_order_and_density():
    rng = random.Random(99)
    overflowed = 0
    for _ in range(10_000):
        raw = [
            _make_fragment(rng, i, rng.randint(20, 80))
            for i in range(rng.randint(3, 12))
        ]
        ordered = order_fragments(raw)
        packed = pack(ordered, budget=512)
        assert packed.token_count <= 512
        # whole fragments only, joined in order: the context must rebuild exactly
        assert packed.context == " ".join(
            render_fragment(f) for f in packed.fragments
        )
        keys = [(-f.order_score, f.para_id, f.start_idx) for f in packed.fragments]
        assert keys == sorted(keys)
        # included fragments are a subsequence of the ordered input
        pos = 0
        for f in packed.fragments:
            pos = ordered.index(f, pos) + 1
        overflowed += packed.fragment_count < len(ordered)
    assert overflowed > 1000  # the skip rule was actually exercised

    counts = set()
    for _ in range(200):
        raw = [_make_fragment(rng, i, rng.randint(70, 78)) for i in range(10)]
        packed = pack(order_fragments(raw), budget=512)
        counts.add(packed.fragment_count)
    assert counts <= {6, 7} and len(counts) == 2
    print(
        f"[PASS] packing: 10000 sets within budget, whole fragments in score "
        f"order ({overflowed} overflowed); 75-word density lands on {sorted(counts)}"
    )


# --------------------------------------------------------------------------
# reasoning-path expansion


def test_path_expansion_sample_construction():
    question = "Who kept the fourth lantern lit?"
    golds = [
        PathParagraph.from_text(f"g{t}", f"Keeper {t}", f"Fact number {t} sits here.")
        for t in range(4)
    ]
    negative = PathParagraph.from_text("n0", "Decoy", "Nothing useful lives here.")

    for n in range(1, 5):
        path = ReasoningPath("q0", question, golds[:n], [negative])
        samples = expand_path(path)
        assert len(samples) == n
        for t, sample in enumerate(samples):
            expected = question + "".join(
                f" [QSEP] Keeper {j} | Fact number {j} sits here." for j in range(t)
            )
            assert sample.query == expected
            assert sample.pos_para_id == f"g{t}"
            assert sample.neg_para_ids == ["n0"]
            assert sample.pair_id == f"q0#h{t}"

    # the full 4-hop expansion, spelled out
    queries = [s.query for s in expand_path(ReasoningPath("q0", question, golds, []))]
    assert queries == [
        "Who kept the fourth lantern lit?",
        "Who kept the fourth lantern lit?"
        " [QSEP] Keeper 0 | Fact number 0 sits here.",
        "Who kept the fourth lantern lit?"
        " [QSEP] Keeper 0 | Fact number 0 sits here."
        " [QSEP] Keeper 1 | Fact number 1 sits here.",
        "Who kept the fourth lantern lit?"
        " [QSEP] Keeper 0 | Fact number 0 sits here."
        " [QSEP] Keeper 1 | Fact number 1 sits here."
        " [QSEP] Keeper 2 | Fact number 2 sits here.",
    ]
    print("[PASS] path expansion: n samples for n in 1..4, query composition exact")


# --------------------------------------------------------------------------
# evaluation metric goldens


def test_metric_golden_suite():
    opts = ["red", "green", "blue"]
    a0, a1, b0, b1 = ("a", 0), ("a", 1), ("b", 0), ("b", 1)
    cases = [
        # numeracy: a numeric gold must appear as a maximal digit run
        ("num exact", numeracy_f1("3", "3"), 1.0),
        ("num wrong number", numeracy_f1("4 field goals", "3"), 0.0),
        ("num in sentence", numeracy_f1("he scored 3 times", "3"), 0.4),
        ("num embedded left", numeracy_f1("13 points", "3"), 0.0),
        ("num embedded right", numeracy_f1("124", "12"), 0.0),
        ("num article stripped", numeracy_f1("the 12", "12"), 1.0),
        ("num among others", numeracy_f1("around 3 or 4", "3"), 0.4),
        ("num spelled out", numeracy_f1("three", "3"), 0.0),
        ("non-numeric fallback", numeracy_f1("Marie Curie", "marie curie"), 1.0),
        # binary: gold label present, opposing label absent
        ("bin exact", binary_match("yes", "yes"), 1),
        ("bin contained", binary_match("yes it is", "yes"), 1),
        ("bin opposing poisons", binary_match("yes and no", "yes"), 0),
        ("bin wrong label", binary_match("no", "yes"), 0),
        ("bin label absent", binary_match("definitely", "yes"), 0),
        ("bin no-side contained", binary_match("not quite no", "no"), 1),
        # multi-choice: highest token overlap wins, ties to the first option
        ("mc exact", multichoice_em("green", opts, "green"), 1),
        ("mc overlap", multichoice_em("the blue one", opts, "blue"), 1),
        ("mc no overlap first", multichoice_em("crimson", opts, "red"), 1),
        ("mc no overlap miss", multichoice_em("crimson", opts, "green"), 0),
        ("mc lettered gold", multichoice_em("green", opts, "(B) green"), 1),
        ("mc tie to first", multichoice_em("red or green", opts, "red"), 1),
        ("mc symmetric tie", multichoice_em("left right", ["left", "right"], "left"), 1),
        # sentence EM / F1 over (para_id, sent_idx) sets
        ("sent perfect", sentence_em_f1({a0, a1}, {a0, a1}), (1, 1.0)),
        ("sent superset lenient", sentence_em_f1({a0, a1, b0}, {a0, a1}), (1, 0.8)),
        (
            "sent superset strict",
            sentence_em_f1({a0, a1, b0}, {a0, a1}, strict=True),
            (0, 0.8),
        ),
        ("sent partial", sentence_em_f1({a0}, {a0, a1}), (0, 2 / 3)),
        ("sent disjoint", sentence_em_f1({b0}, {a0}), (0, 0.0)),
        ("sent empty pred", sentence_em_f1(set(), {a0}), (0, 0.0)),
        ("sent strict equal", sentence_em_f1({a0, a1}, {a0, a1}, strict=True), (1, 1.0)),
        ("sent half recall", sentence_em_f1({a0, b0}, {a0, a1, b0, b1}), (0, 2 / 3)),
    ]
    assert len(cases) == 30
    for label, got, expected in cases:
        if isinstance(expected, tuple):
            assert got[0] == expected[0], label
            assert math.isclose(got[1], expected[1], abs_tol=1e-12), label
        else:
            assert math.isclose(got, expected, abs_tol=1e-12), label
    print("[PASS] metric goldens: 30/30 hand-computed cases match")


# --------------------------------------------------------------------------
# sampling schedule


def test_sampler_frequencies_and_dev_reduction():
    start = time.perf_counter()
    tasks = [
        TaskSpec("masking", "mlm"),
        TaskSpec("reading", "group1", last_dev_accuracy=0.5),
        TaskSpec("choices", "group1", last_dev_accuracy=0.9),
        TaskSpec("hops", "group2", last_dev_accuracy=0.2),
        TaskSpec("numbers", "group2"),
    ]
    freq1 = run_schedule(
        Schedule(stage=1), tasks, draws=100_000, rng=random.Random(11)
    ).frequencies()
    assert abs(freq1["masking"] - 0.35) <= 0.01

    freq2 = run_schedule(
        Schedule(stage=2), tasks, draws=100_000, rng=random.Random(12)
    ).frequencies()
    group2_share = freq2.get("hops", 0.0) + freq2.get("numbers", 0.0)
    assert abs(group2_share - 0.80) <= 0.01
    assert "masking" not in freq2

    for count in (2500, 10_000, 100_000):
        assert abs(len(reduce_dev(count)) - 1250) <= 1

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(
        f"[PASS] sampler: masking {freq1['masking']:.4f} (target 0.35), "
        f"group2 {group2_share:.4f} (target 0.80), dev cuts at 1250, {elapsed:.2f}s"
    )


# --------------------------------------------------------------------------
# significance testing calibration


def test_bootstrap_null_calibration_and_separation():
    trials = 200
    hits = 0
    for i in range(trials):
        rng = np.random.default_rng(1000 + i)
        a = rng.normal(size=500)
        b = rng.normal(size=500)
        result = paired_bootstrap(a, b, resamples=1000, rng=np.random.default_rng(i))
        hits += result.significant
    rate = hits / trials
    assert rate <= 0.08

    sep = paired_bootstrap(np.ones(500), np.zeros(500), resamples=1000, rng=0)
    assert sep.p_value == 0.0 and sep.significant
    print(
        f"[PASS] bootstrap: null significant-rate {rate:.3f} (<= 0.08), "
        f"full separation p = {sep.p_value}"
    )


# --------------------------------------------------------------------------
# training-data factory statistics


def _factory_paragraphs():
    golds = [
        PathParagraph.from_text(
            "g0",
            "Gold Zero",
            "Alpha fact one sits right here. Alpha fact two sits right here.",
            gold_sents=(0, 1),
        ),
        PathParagraph.from_text(
            "g1",
            "Gold One",
            "Beta fact one sits right here. Beta fact two sits right here.",
            gold_sents=(0, 1),
        ),
    ]
    negatives = [
        PathParagraph.from_text(
            "n0", "Noise Zero", "Stray remark one fills space. Stray remark two also."
        ),
        PathParagraph.from_text(
            "n1", "Noise One", "Idle chatter one fills space. Idle chatter two also."
        ),
    ]
    return golds, negatives


def test_factory_statistics():
    golds, negatives = _factory_paragraphs()
    rng = random.Random(4242)
    withheld = total = 0
    for _ in range(3000):
        sample = build_goldplusdistractors(
            "Which facts line up?", "alpha and beta", golds, negatives, rng, budget=160
        )
        withheld += sample.meta["titles_withheld"]
        total += sample.meta["titles_total"]
    withhold_rate = withheld / total
    assert abs(withhold_rate - 0.10) <= 0.01

    paragraphs = [
        (
            "Alpha Register",
            "Alice Baker met Carol Diaz near Lake Erie at dawn. "
            "Frank Gray told Helen Iris about Jack Kent that evening.",
        ),
        (
            "Beta Register",
            "Laura Moss walked beside Nora Pratt toward Quill Ridge slowly. "
            "Sara Trent saw Uma Vane greet Wade York there again.",
        ),
        (
            "Gamma Register",
            "Omar Quinn drove past Rosa Lane near Stone Bridge today. "
            "Tess Urho met Vera Walsh outside Young Hall before noon.",
        ),
    ]
    rng_mask = random.Random(13)
    entity = rand = 0
    for _ in range(400):
        sample = build_selfsupervised(paragraphs, rng_mask, budget=320)
        entity += sample.meta["spans_entity"]
        rand += sample.meta["spans_random"]
    entity_rate = entity / (entity + rand)
    assert abs(entity_rate - 0.65) <= 0.02

    gold_texts = [s for g in golds for s in g.sentences]
    rng_noans = random.Random(77)
    for _ in range(300):
        sample = build_unanswerable(
            "Which facts line up?", golds, negatives, rng_noans, budget=160
        )
        assert sample.target == NO_ANSWER == "<No Answer>"
        assert sample.meta["gold_sentences_dropped"] >= 1
        assert any(text not in sample.input for text in gold_texts)

    print(
        f"[PASS] factory stats: withheld {withhold_rate:.4f} (target 0.10), "
        f"entity masks {entity_rate:.4f} (target 0.65), 300/300 unanswerable "
        f"targets exact with a gold sentence absent"
    )


# --------------------------------------------------------------------------
# wire-format goldens


def test_serialization_templates_bytematch():
    assert serialize_retriever_query("Q?", []) == "Q?"
    assert (
        serialize_retriever_query("Q?", [("T", "A. B.")]) == "Q? [QSEP] T | A. B."
    )
    assert (
        serialize_retriever_query(
            "question", [("title 1", "sentence 1"), ("title 2", "sentence 2")]
        )
        == "question [QSEP] title 1 | sentence 1 [QSEP] title 2 | sentence 2"
    )
    assert document_text("T", "body text") == "T | body text"
    assert (
        serialize_reranker_input("query", "title", ["s0.", "s1."])
        == "[CLS] query [SEP] yes no [INSUFF] [SEP] title [SM] s0. [SM] s1. [SEP]"
    )
    assert (
        serialize_evidence_input("question", [("t", "s.")])
        == "[CLS] question [SEP] yes no [INSUFF] [SEP] [SM] t | s. [SEP]"
    )
    assert (
        serialize_evidence_input("q", [("t1", "s1."), ("t2", "s2.")])
        == "[CLS] q [SEP] yes no [INSUFF] [SEP] [SM] t1 | s1. [SM] t2 | s2. [SEP]"
    )
    print("[PASS] serialization: retriever, reranker, and evidence templates byte-match")
