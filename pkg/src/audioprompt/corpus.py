"""Synthetic corpora: tone-coded utterances, sound-class clips, manifests, and LM text.

A corpus directory holds ``manifest.jsonl`` (one header record, then one record
per utterance) and an ``audio/`` directory of 16-bit PCM WAV files. Resource
subsets (the 5%/10%/100% pretraining conditions) are nested id lists stored in
the header.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .synth import SOUND_CLASSES, SynthConfig, synthesize_sound, synthesize_waveform
from .vocabulary import (
    COLOR_WORDS,
    FILLER_WORDS,
    GENDER_WORDS,
    SOUND_WORDS,
    Vocabulary,
    default_vocabulary,
)

MANIFEST_NAME = "manifest.jsonl"
FORMAT_VERSION = 1


class CorpusIntegrityError(ValueError):
    """Manifest violates a corpus invariant (overlapping splits, bad labels, ...)."""


def stable_rng(*parts) -> np.random.Generator:
    """Generator seeded from a stable hash of the given parts (ints or strings)."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


@dataclass(frozen=True)
class LabelRule:
    """Declarative token-content (or sound-class) to label mapping.

    kind "keyword": the label is ``mapping[w]`` for the unique keyword ``w``
    present in the utterance tokens. kind "sound_class": the label is
    ``mapping[class_name]`` for the clip's generator class.
    """

    kind: str  # "keyword" | "sound_class"
    mapping: tuple[tuple[str, str], ...]

    def as_dict(self) -> dict[str, str]:
        return dict(self.mapping)

    def apply_to_tokens(self, symbols: list[str]) -> str:
        if self.kind != "keyword":
            raise ValueError(f"rule kind {self.kind!r} does not label token content")
        hits = [w for w, _ in self.mapping if w in symbols]
        if len(hits) != 1:
            raise CorpusIntegrityError(
                f"expected exactly one of {[w for w, _ in self.mapping]} in {symbols}, got {hits}"
            )
        return self.as_dict()[hits[0]]

    def apply_to_sound(self, class_name: str) -> str:
        if self.kind != "sound_class":
            raise ValueError(f"rule kind {self.kind!r} does not label sound classes")
        return self.as_dict()[class_name]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mapping": dict(self.mapping)}

    @classmethod
    def from_dict(cls, payload: dict) -> "LabelRule":
        return cls(kind=payload["kind"], mapping=tuple(payload["mapping"].items()))


@dataclass(frozen=True)
class TaskSpec:
    name: str
    answer_set: tuple[str, ...]
    question_prompt: str
    label_rule: LabelRule

    def __post_init__(self):
        if len(self.answer_set) not in (2, 9):
            raise ValueError(f"answer_set must have 2 or 9 labels, got {len(self.answer_set)}")
        if not self.question_prompt.strip():
            raise ValueError("question prompt must be non-empty")
        if set(self.label_rule.as_dict().values()) != set(self.answer_set):
            raise ValueError("label rule outputs must exhaust the answer set")

    @property
    def keywords(self) -> tuple[str, ...]:
        return tuple(w for w, _ in self.label_rule.mapping)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "answer_set": list(self.answer_set),
            "question_prompt": self.question_prompt,
            "label_rule": self.label_rule.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TaskSpec":
        return cls(
            name=payload["name"],
            answer_set=tuple(payload["answer_set"]),
            question_prompt=payload["question_prompt"],
            label_rule=LabelRule.from_dict(payload["label_rule"]),
        )


def identity_keyword_rule(words: tuple[str, ...]) -> LabelRule:
    return LabelRule(kind="keyword", mapping=tuple((w, w) for w in words))


def color_task() -> TaskSpec:
    return TaskSpec("color", COLOR_WORDS, "the color is", identity_keyword_rule(COLOR_WORDS))


def gender_task() -> TaskSpec:
    return TaskSpec("gender", GENDER_WORDS, "the person is a", identity_keyword_rule(GENDER_WORDS))


def sound_task() -> TaskSpec:
    mapping = tuple((sc.class_name, sc.target_word) for sc in SOUND_CLASSES)
    return TaskSpec("sound", SOUND_WORDS, "what sound is this?", LabelRule("sound_class", mapping))


def default_tasks() -> tuple[TaskSpec, TaskSpec]:
    return (color_task(), gender_task())


@dataclass
class Utterance:
    id: str
    tokens: list[int]
    waveform: np.ndarray | None
    labels: dict[str, str]
    split: str = "train"
    kind: str = "speech"  # "speech" | "sound"
    sound_class: str | None = None
    audio_path: str | None = None
    duration_s: float = 0.0


@dataclass(frozen=True)
class CorpusSpec:
    n_utterances: int = 2000
    token_len: tuple[int, int] = (3, 8)
    tasks: tuple[TaskSpec, ...] = field(default_factory=default_tasks)
    resource_fractions: tuple[float, ...] = (0.05, 0.1, 1.0)
    train_fraction: float = 0.85
    synth: SynthConfig = field(default_factory=SynthConfig)


@dataclass(frozen=True)
class SoundCorpusSpec:
    clips_per_class: int = 40
    train_fraction: float = 0.5
    synth: SynthConfig = field(default_factory=SynthConfig)


def sample_speech_tokens(
    rng: np.random.Generator,
    vocab: Vocabulary,
    token_len: tuple[int, int],
    keyword_groups: tuple[tuple[str, ...], ...],
) -> list[int]:
    """Random utterance tokens: exactly one word from each keyword group, fillers elsewhere."""
    lo, hi = token_len
    n = int(rng.integers(lo, hi + 1))
    n = max(n, len(keyword_groups))
    words = [str(rng.choice(group)) for group in keyword_groups]
    words += [str(rng.choice(FILLER_WORDS)) for _ in range(n - len(words))]
    rng.shuffle(words)
    return [vocab.id_of(w) for w in words]


def _write_wav(path: Path, waveform: np.ndarray, sample_rate: int) -> None:
    pcm = np.clip(np.round(waveform * 32767.0), -32768, 32767).astype(np.int16)
    wavfile.write(path, sample_rate, pcm)


def _read_wav(path: Path) -> np.ndarray:
    _, pcm = wavfile.read(path)
    return pcm.astype(np.float64) / 32767.0


def _nested_subsets(ids: list[str], fractions: tuple[float, ...], rng: np.random.Generator) -> dict[str, list[str]]:
    order = list(ids)
    rng.shuffle(order)
    subsets = {}
    for f in sorted(fractions):
        size = int(np.floor(f * len(ids)))
        subsets[f"{f:g}"] = order[:size]
    return subsets


def _split_ids(ids: list[str], train_fraction: float, rng: np.random.Generator) -> tuple[set[str], set[str]]:
    order = list(ids)
    rng.shuffle(order)
    n_train = int(np.floor(train_fraction * len(order)))
    return set(order[:n_train]), set(order[n_train:])


@dataclass
class Corpus:
    root: Path
    vocab: Vocabulary
    synth: SynthConfig
    tasks: tuple[TaskSpec, ...]
    resource_subsets: dict[str, list[str]]
    records: list[Utterance]
    _cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def task(self, name: str) -> TaskSpec:
        for t in self.tasks:
            if t.name == name:
                return t
        raise KeyError(f"no task {name!r}; available: {[t.name for t in self.tasks]}")

    def train_records(self, resource: float | None = None) -> list[Utterance]:
        recs = [r for r in self.records if r.split == "train"]
        if resource is None:
            return recs
        key = f"{resource:g}"
        if key not in self.resource_subsets:
            raise KeyError(
                f"no resource subset {key!r}; available: {sorted(self.resource_subsets)}"
            )
        keep = set(self.resource_subsets[key])
        return [r for r in recs if r.id in keep]

    def test_records(self) -> list[Utterance]:
        return [r for r in self.records if r.split == "test"]

    def waveform(self, rec: Utterance) -> np.ndarray:
        if rec.waveform is not None:
            return rec.waveform
        if rec.id not in self._cache:
            self._cache[rec.id] = _read_wav(self.root / rec.audio_path)
        return self._cache[rec.id]

    def label_balance(self, task_name: str, split: str | None = None) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.records:
            if split is not None and r.split != split:
                continue
            if task_name in r.labels:
                counts[r.labels[task_name]] = counts.get(r.labels[task_name], 0) + 1
        return counts


def build_corpus(spec: CorpusSpec, outdir: Path | str, seed: int, vocab: Vocabulary | None = None) -> Corpus:
    """Generate utterances, write audio + manifest, and emit nested resource subsets."""
    vocab = vocab or default_vocabulary()
    spec.synth.validate(len(vocab))
    outdir = Path(outdir)
    (outdir / "audio").mkdir(parents=True, exist_ok=True)

    keyword_groups = tuple(t.keywords for t in spec.tasks if t.label_rule.kind == "keyword")
    records: list[Utterance] = []
    for i in range(spec.n_utterances):
        rng = stable_rng(seed, "utt", i)
        tokens = sample_speech_tokens(rng, vocab, spec.token_len, keyword_groups)
        symbols = [vocab.symbol_of(t) for t in tokens]
        labels = {
            t.name: t.label_rule.apply_to_tokens(symbols)
            for t in spec.tasks
            if t.label_rule.kind == "keyword"
        }
        wave = synthesize_waveform(tokens, spec.synth, vocab, seed=int(rng.integers(2**31)))
        uid = f"utt-{i:06d}"
        records.append(
            Utterance(
                id=uid,
                tokens=tokens,
                waveform=wave,
                labels=labels,
                audio_path=f"audio/{uid}.wav",
                duration_s=wave.size / spec.synth.sample_rate,
            )
        )

    ids = [r.id for r in records]
    train_ids, test_ids = _split_ids(ids, spec.train_fraction, stable_rng(seed, "split"))
    for r in records:
        r.split = "train" if r.id in train_ids else "test"
    subsets = _nested_subsets(
        [i for i in ids if i in train_ids], spec.resource_fractions, stable_rng(seed, "resource")
    )

    return _write_corpus(outdir, vocab, spec.synth, spec.tasks, subsets, records)


def build_sound_corpus(
    spec: SoundCorpusSpec, outdir: Path | str, seed: int, vocab: Vocabulary | None = None
) -> Corpus:
    """Clips for all nine sound classes, split per class so both splits cover every class."""
    vocab = vocab or default_vocabulary()
    spec.synth.validate(len(vocab))
    outdir = Path(outdir)
    (outdir / "audio").mkdir(parents=True, exist_ok=True)

    task = sound_task()
    records: list[Utterance] = []
    idx = 0
    for sc in SOUND_CLASSES:
        n_train = int(np.floor(spec.train_fraction * spec.clips_per_class))
        for j in range(spec.clips_per_class):
            wave = synthesize_sound(sc, spec.synth, seed=int(stable_rng(seed, "snd", idx).integers(2**31)))
            uid = f"snd-{idx:06d}"
            records.append(
                Utterance(
                    id=uid,
                    tokens=[],
                    waveform=wave,
                    labels={task.name: task.label_rule.apply_to_sound(sc.class_name)},
                    split="train" if j < n_train else "test",
                    kind="sound",
                    sound_class=sc.class_name,
                    audio_path=f"audio/{uid}.wav",
                    duration_s=wave.size / spec.synth.sample_rate,
                )
            )
            idx += 1

    return _write_corpus(outdir, vocab, spec.synth, (task,), {}, records)


def _write_corpus(
    outdir: Path,
    vocab: Vocabulary,
    synth: SynthConfig,
    tasks: tuple[TaskSpec, ...],
    subsets: dict[str, list[str]],
    records: list[Utterance],
) -> Corpus:
    header = {
        "record": "header",
        "format_version": FORMAT_VERSION,
        "audio_format": "pcm16",
        "sample_rate": synth.sample_rate,
        "synth": synth.to_dict(),
        "vocab": vocab.to_dict(),
        "tasks": [t.to_dict() for t in tasks],
        "resource_subsets": subsets,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for r in records:
        _write_wav(outdir / r.audio_path, r.waveform, synth.sample_rate)
        lines.append(
            json.dumps(
                {
                    "record": "utterance",
                    "id": r.id,
                    "tokens": " ".join(vocab.symbol_of(t) for t in r.tokens),
                    "labels": r.labels,
                    "audio_path": r.audio_path,
                    "duration_s": r.duration_s,
                    "split": r.split,
                    "kind": r.kind,
                    "sound_class": r.sound_class,
                },
                sort_keys=True,
            )
        )
    (outdir / MANIFEST_NAME).write_text("\n".join(lines) + "\n")
    corpus = Corpus(outdir, vocab, synth, tasks, subsets, records)
    _validate_corpus(corpus)
    return corpus


def load_corpus(root: Path | str) -> Corpus:
    root = Path(root)
    lines = (root / MANIFEST_NAME).read_text().splitlines()
    header = json.loads(lines[0])
    if header.get("record") != "header":
        raise CorpusIntegrityError("manifest must start with a header record")
    if header["format_version"] != FORMAT_VERSION:
        raise CorpusIntegrityError(f"unsupported manifest version {header['format_version']}")
    vocab = Vocabulary.from_dict(header["vocab"])
    synth = SynthConfig.from_dict(header["synth"])
    tasks = tuple(TaskSpec.from_dict(t) for t in header["tasks"])
    records = []
    for line in lines[1:]:
        row = json.loads(line)
        records.append(
            Utterance(
                id=row["id"],
                tokens=[vocab.id_of(s) for s in row["tokens"].split()] if row["tokens"] else [],
                waveform=None,
                labels=row["labels"],
                split=row["split"],
                kind=row["kind"],
                sound_class=row["sound_class"],
                audio_path=row["audio_path"],
                duration_s=row["duration_s"],
            )
        )
    corpus = Corpus(root, vocab, synth, tasks, header["resource_subsets"], records)
    _validate_corpus(corpus)
    return corpus


def _validate_corpus(corpus: Corpus) -> None:
    ids = [r.id for r in corpus.records]
    if len(set(ids)) != len(ids):
        raise CorpusIntegrityError("duplicate utterance ids in manifest")
    train = {r.id for r in corpus.records if r.split == "train"}
    test = {r.id for r in corpus.records if r.split == "test"}
    if train & test:
        raise CorpusIntegrityError(f"train/test splits overlap: {sorted(train & test)[:5]} ...")
    by_name = {t.name: t for t in corpus.tasks}
    for r in corpus.records:
        for task_name, label in r.labels.items():
            if task_name in by_name and label not in by_name[task_name].answer_set:
                raise CorpusIntegrityError(
                    f"{r.id}: label {label!r} outside answer set of task {task_name!r}"
                )
    prev: set[str] | None = None
    for key in sorted(corpus.resource_subsets, key=float):
        cur = set(corpus.resource_subsets[key])
        if prev is not None and not prev <= cur:
            raise CorpusIntegrityError("resource subsets are not nested")
        prev = cur


def lm_documents(
    vocab: Vocabulary,
    tasks: tuple[TaskSpec, ...],
    n_docs: int,
    seed: int,
    token_len: tuple[int, int] = (3, 8),
    episodes_per_doc: tuple[int, int] = (1, 3),
    asr_prompt: str = "what did the speaker say?",
    sound_prompt: str = "what sound is this?",
) -> list[list[int]]:
    """Synthetic text the LM is trained on: passages followed by questions and answers.

    Each document concatenates 1..k episodes of ``passage + question + answer +
    <eoa>``, mixing transcription episodes (answer repeats the passage), keyword
    episodes (answer is the group keyword present), and sound-word episodes, so
    prompts assembled later from demonstrations stay in-distribution.
    """
    keyword_tasks = [t for t in tasks if t.label_rule.kind == "keyword"]
    keyword_groups = tuple(t.keywords for t in keyword_tasks)
    asr_ids = vocab.encode(asr_prompt)
    sound_ids = vocab.encode(sound_prompt)
    docs: list[list[int]] = []
    for i in range(n_docs):
        rng = stable_rng(seed, "doc", i)
        doc: list[int] = []
        for _ in range(int(rng.integers(episodes_per_doc[0], episodes_per_doc[1] + 1))):
            if rng.random() < 0.25:
                passage = sample_speech_tokens(rng, vocab, token_len, ((SOUND_WORDS),))
                verb = next(vocab.symbol_of(t) for t in passage if vocab.symbol_of(t) in SOUND_WORDS)
                if rng.random() < 0.2:
                    question, answer = asr_ids, list(passage)
                else:
                    question, answer = sound_ids, [vocab.id_of(verb)]
            else:
                passage = sample_speech_tokens(rng, vocab, token_len, keyword_groups)
                symbols = [vocab.symbol_of(t) for t in passage]
                choice = rng.integers(0, len(keyword_tasks) + 1)
                if choice == len(keyword_tasks):
                    question, answer = asr_ids, list(passage)
                else:
                    t = keyword_tasks[int(choice)]
                    question = vocab.encode(t.question_prompt)
                    answer = [vocab.id_of(t.label_rule.apply_to_tokens(symbols))]
            doc += passage + question + answer + [vocab.eoa_id]
        docs.append(doc)
    return docs
