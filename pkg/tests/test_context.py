from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hopforge.context import (
    Fragment,
    order_fragments,
    pack,
    recover_fragments,
    render_fragment,
    render_qa_input,
)
from hopforge.corpus import Paragraph, split_sentences


def para(n_sentences, pid="p0", title="Title"):
    text = " ".join(f"Sentence number {i} here." for i in range(n_sentences))
    return Paragraph(
        para_id=pid, doc_id="d0", title=title, text=text,
        sentence_spans=tuple(split_sentences(text)), hyperlink_titles=(),
    )


def frag(pid="p0", score=0.5, text="Some text.", start=0, end=0, title="T"):
    return Fragment(
        title=title, text=text, para_id=pid,
        order_score=score, start_idx=start, end_idx=end,
    )


class TestRecoverFragments:
    def test_middle_sentence_expands_both_ways(self):
        got = recover_fragments(para(5), {2: 0.8}, p=0.4)
        assert len(got) == 1
        f = got[0]
        assert (f.start_idx, f.end_idx) == (1, 3)
        assert f.text == "Sentence number 1 here. Sentence number 2 here. Sentence number 3 here."
        assert f.order_score == pytest.approx(0.5 * 0.4 + 0.5 * 0.8)

    def test_edges_clamp_to_paragraph(self):
        got = recover_fragments(para(3), {0: 0.5}, p=0.5)
        assert (got[0].start_idx, got[0].end_idx) == (0, 1)
        got = recover_fragments(para(3), {2: 0.5}, p=0.5)
        assert (got[0].start_idx, got[0].end_idx) == (1, 2)

    def test_single_sentence_paragraph(self):
        got = recover_fragments(para(1), {0: 0.9}, p=0.1)
        assert (got[0].start_idx, got[0].end_idx) == (0, 0)
        assert got[0].text == "Sentence number 0 here."

    def test_overlapping_windows_merge(self):
        # windows around 1 and 3 are [0,2] and [2,4]: one fragment
        got = recover_fragments(para(6), {1: 0.3, 3: 0.9}, p=0.5)
        assert len(got) == 1
        assert (got[0].start_idx, got[0].end_idx) == (0, 4)
        assert got[0].order_score == pytest.approx(0.5 * 0.5 + 0.5 * 0.9)

    def test_touching_windows_merge(self):
        # windows [0,2] and [3,5] touch (2+1 == 3) and merge
        got = recover_fragments(para(7), {1: 0.2, 4: 0.6}, p=0.0)
        assert len(got) == 1
        assert (got[0].start_idx, got[0].end_idx) == (0, 5)

    def test_distant_windows_stay_separate(self):
        got = recover_fragments(para(9), {0: 0.9, 7: 0.3}, p=1.0)
        assert [(f.start_idx, f.end_idx) for f in got] == [(0, 1), (6, 8)]
        assert [f.order_score for f in got] == [pytest.approx(0.95), pytest.approx(0.65)]

    def test_out_of_range_index_rejected(self):
        with pytest.raises(IndexError):
            recover_fragments(para(2), {5: 0.5}, p=0.5)

    @given(
        n=st.integers(min_value=1, max_value=12),
        data=st.data(),
    )
    def test_matches_interval_merge_oracle(self, n, data):
        idxs = data.draw(
            st.sets(st.integers(min_value=0, max_value=n - 1), min_size=1, max_size=n)
        )
        selected = {i: 0.5 for i in idxs}
        got = recover_fragments(para(n), selected, p=0.5)
        # oracle: mark covered sentences, read off maximal runs
        covered = set()
        for i in idxs:
            covered.update({max(0, i - 1), i, min(n - 1, i + 1)})
        runs = []
        for j in sorted(covered):
            if runs and j == runs[-1][1] + 1:
                runs[-1][1] = j
            else:
                runs.append([j, j])
        assert [(f.start_idx, f.end_idx) for f in got] == [tuple(r) for r in runs]
        for f in got:
            assert any(f.start_idx <= i <= f.end_idx for i in idxs)


class TestOrderFragments:
    def test_descending_score_then_key(self):
        fs = [
            frag("b", 0.5, start=0),
            frag("a", 0.5, start=2),
            frag("a", 0.5, start=1),
            frag("c", 0.9, start=0),
        ]
        got = order_fragments(fs)
        assert [(f.para_id, f.start_idx) for f in got] == [
            ("c", 0), ("a", 1), ("a", 2), ("b", 0),
        ]


class TestPack:
    def test_render_fragment_format(self):
        assert render_fragment(frag(title="Doc", text="A b. C d.")) == "Doc: A b. C d."

    def test_all_fit(self):
        fs = [frag(text="one two three.", title="T1"), frag(text="four five.", title="T2")]
        got = pack(fs, budget=100)
        assert got.context == "T1: one two three. T2: four five."
        assert got.fragment_count == 2
        assert got.fragments == tuple(fs)

    def test_oversize_fragment_skipped_smaller_later_kept(self):
        fs = [
            frag(text="short one.", title="A"),
            frag(text=" ".join(["word"] * 50), title="B"),
            frag(text="tiny.", title="C"),
        ]
        got = pack(fs, budget=10)
        assert got.fragment_count == 2
        assert got.context == "A: short one. C: tiny."

    def test_never_truncates(self):
        fs = [frag(text=" ".join(["word"] * 20), title="Big")]
        got = pack(fs, budget=5)
        assert got.context == "" and got.fragment_count == 0 and got.token_count == 0

    def test_initial_paragraph_comes_first_verbatim(self):
        got = pack([frag(text="extra bit.", title="T")], budget=50, initial_paragraph="Seed paragraph text here.")
        assert got.context == "Seed paragraph text here. T: extra bit."
        assert got.fragment_count == 1

    def test_initial_paragraph_over_budget_errors(self):
        with pytest.raises(ValueError):
            pack([], budget=3, initial_paragraph="way too many words to fit in here.")

    def test_budget_counts_tokens_not_chars(self):
        # 3 tokens rendered ("T:" attaches to title token)
        got = pack([frag(text="a b.", title="T")], budget=3)
        assert got.fragment_count == 1 and got.token_count == 3

    @given(
        sizes=st.lists(st.integers(min_value=1, max_value=30), min_size=0, max_size=12),
        budget=st.integers(min_value=1, max_value=60),
    )
    def test_greedy_skip_invariants(self, sizes, budget):
        fs = [frag(pid=f"p{i}", text=" ".join(["w"] * k) + ".", title=f"T{i}") for i, k in enumerate(sizes)]
        got = pack(fs, budget=budget)
        assert got.token_count <= budget
        # included fragments appear whole and in order
        pos = -1
        for f in got.fragments:
            r = render_fragment(f)
            at = got.context.find(r, pos + 1)
            assert at > pos
            pos = at


class TestRenderQAInput:
    def test_open_domain(self):
        assert render_qa_input("Who wrote it?") == "Who wrote it? \\n"

    def test_reading_comprehension(self):
        got = render_qa_input("Who wrote it?", context="T: Some context.")
        assert got == "Who wrote it? \\n T: Some context."

    def test_multi_choice(self):
        got = render_qa_input("Pick one?", options=["first", "second"])
        assert got == "Pick one? \\n (A) first (B) second"

    def test_multi_choice_with_context(self):
        got = render_qa_input("Pick one?", options=["first", "second"], context="Some context.")
        assert got == "Pick one? \\n (A) first (B) second \\n Some context."

    def test_separator_is_two_characters(self):
        out = render_qa_input("Q?")
        assert "\n" not in out
        assert out.endswith("\\n") and len("\\n") == 2

    def test_explicit_letters(self):
        got = render_qa_input("Q?", options=[("C", "see"), ("D", "dee")])
        assert got == "Q? \\n (C) see (D) dee"

    def test_duplicate_letters_rejected(self):
        with pytest.raises(ValueError):
            render_qa_input("Q?", options=[("A", "x"), ("A", "y")])

    def test_many_options_letter_sequence(self):
        got = render_qa_input("Q?", options=[f"o{i}" for i in range(5)])
        assert got == "Q? \\n (A) o0 (B) o1 (C) o2 (D) o3 (E) o4"

    def test_empty_options_treated_as_absent(self):
        assert render_qa_input("Q?", options=[], context="ctx.") == "Q? \\n ctx."
