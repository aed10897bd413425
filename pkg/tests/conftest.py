import random

import pytest

from chatmt.corpus import BitextPair, ChatRecord, Dialogue


def make_micro_corpus():
    """10 pairs: 7 clean, 1 overlong sentence, 1 exact duplicate, 1 ratio
    violator. Expected outcome: kept=7, drops {length:1, dedup:1, ratio:1}."""
    pairs = [
        BitextPair("hello there", "hallo du"),
        BitextPair("how are you", "wie geht es dir"),
        BitextPair(" ".join(["a"] * 101), "zu lang"),          # length
        BitextPair("good morning", "guten Morgen"),
        BitextPair("hello there", "hallo du"),                  # dedup
        BitextPair("thanks", "danke sehr gerne vielen lieben"),  # ratio 1:5
        BitextPair("see you soon", "bis bald"),
        BitextPair("the weather is nice", "das Wetter ist gut"),
        BitextPair("one two three four", "eins zwei drei vier"),
        BitextPair("good night", "gute Nacht"),
    ]
    assert len(pairs) == 10
    return pairs


@pytest.fixture
def micro_corpus():
    return make_micro_corpus()


_WORDS = ["hallo", "guten", "tag", "wie", "geht", "es", "dir", "danke",
          "bitte", "ja", "nein", "morgen", "abend", "hilfe", "problem"]


def random_payload(rng: random.Random, max_words: int = 6) -> str:
    return " ".join(rng.choices(_WORDS, k=rng.randint(1, max_words)))


def make_dialogue(rng: random.Random, dialogue_id: str, n_turns: int | None = None,
                  src_lang: str = "de", tgt_lang: str = "en") -> Dialogue:
    n_turns = n_turns or rng.randint(1, 6)
    turns = tuple(
        ChatRecord(
            dialogue_id=dialogue_id,
            turn_index=i,
            speaker=rng.choice(["agent", "customer"]),
            src_text=random_payload(rng),
            tgt_text=random_payload(rng),
            src_lang=src_lang,
            tgt_lang=tgt_lang,
        )
        for i in range(n_turns)
    )
    return Dialogue(dialogue_id=dialogue_id, turns=turns)
