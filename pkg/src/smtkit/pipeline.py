"""Config-driven preprocessing pipeline and run manifests.

A config is a flat ``key = value`` text file. ``stages`` lists the
pre-decoding stages in order; ``post_stages`` lists steps applied to a
decoder output file. ``variant`` selects one of the system presets below
when ``stages`` is not given.
"""

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .corpus import (
    FilterPolicy,
    normalize_text,
    read_lines,
    read_sentences,
    tokenize,
    violates,
    write_lines,
    write_sentences,
)
from .exceptions import ConfigError, DataError, InvariantError, SmtkitError
from .lm import NGramModel
from .morph import DEFAULT_MARKER, StemRuleTable, SuffixTable, rejoin, split_sentence, stem_sentence
from .reorder import RuleSet, apply_rules, linearize, parse_bracketed
from .translit import CharTransModel, find_oovs, replace_oovs

STAGES = ("normalize", "tokenize", "filter", "split-suffix", "stem", "reorder", "rejoin")
POST_STAGES = ("rejoin", "transliterate")

# BL: baseline, RO: reordering, SPLIT: suffix separation, FACT: stem factors,
# TR: transliteration of OOVs in the decoder output
PRESETS = {
    "S1": (("tokenize", "filter"), ()),
    "S2": (("tokenize", "filter", "reorder"), ()),
    "S3": (("tokenize", "filter", "reorder", "stem"), ()),
    "S3'": (("tokenize", "filter", "reorder", "split-suffix", "stem"), ()),
    "S4": (("tokenize", "filter", "reorder", "stem"), ("transliterate",)),
    "S4'": (("tokenize", "filter", "reorder", "split-suffix", "stem"), ("rejoin", "transliterate")),
}
VARIANT_ALIASES = {"S3′": "S3'", "S4′": "S4'"}

# resource keys that must name existing files when set
RESOURCE_KEYS = ("suffix_table", "rules", "trees", "stem_rules_src", "stem_rules_tgt", "translit_model", "lm", "vocab", "decoder_output")
STAGE_RESOURCES = {
    "reorder": ("rules", "trees"),
    "split-suffix": ("suffix_table",),
}
POST_RESOURCES = {"transliterate": ("translit_model", "lm", "vocab")}

STAGE_VERSION = __version__


@dataclass
class PipelineConfig:
    source: str = None
    target: str = None
    output_dir: str = "out"
    stages: tuple = ()
    post_stages: tuple = ()
    variant: str = None
    source_script: str = "latin"
    target_script: str = "indic"
    max_words: int = 80
    max_ratio: float = 9.0
    marker: str = DEFAULT_MARKER
    seed: int = 0
    k: int = 100
    suffix_table: str = None
    rules: str = None
    trees: str = None
    stem_rules_src: str = "english"
    stem_rules_tgt: str = None
    translit_model: str = None
    lm: str = None
    vocab: str = None
    decoder_output: str = None
    base_dir: str = field(default=".", repr=False)

    @classmethod
    def from_text(cls, text, base_dir="."):
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line.startswith("#"):
                continue
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip().replace("-", "_"), value.strip()
            if not sep or not key:
                raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
            if key not in cls.__dataclass_fields__ or key == "base_dir":
                raise ConfigError(f"config line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
            values[key] = value
        return cls.from_dict(values, base_dir)

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.from_text(text, base_dir=str(path.parent))

    @classmethod
    def from_dict(cls, values, base_dir="."):
        kw = {"base_dir": base_dir}
        for key, value in values.items():
            if key in ("stages", "post_stages"):
                kw[key] = tuple(value.split()) if isinstance(value, str) else tuple(value)
            elif key in ("max_words", "seed", "k"):
                try:
                    kw[key] = int(value)
                except ValueError:
                    raise ConfigError(f"{key} must be an integer, got {value!r}") from None
            elif key == "max_ratio":
                try:
                    kw[key] = float(value)
                except ValueError:
                    raise ConfigError(f"max_ratio must be a number, got {value!r}") from None
            else:
                kw[key] = value if value != "" else None
        cfg = cls(**kw)
        if cfg.variant:
            cfg.variant = VARIANT_ALIASES.get(cfg.variant, cfg.variant)
            if cfg.variant not in PRESETS:
                raise ConfigError(f"unknown variant {cfg.variant!r}; choose from {sorted(PRESETS)}")
            pre, post = PRESETS[cfg.variant]
            if not cfg.stages:
                cfg.stages = pre
            if not cfg.post_stages and "post_stages" not in values:
                cfg.post_stages = post
        return cfg

    def resolve(self, path):
        if path is None:
            return None
        p = Path(path)
        return str(p if p.is_absolute() else Path(self.base_dir) / p)

    def validate(self, check_files=True):
        """Check stage names, ordering and resources; no other I/O."""
        for s in self.stages:
            if s not in STAGES:
                raise ConfigError(f"unknown stage {s!r}; choose from {', '.join(STAGES)}")
        for s in self.post_stages:
            if s not in POST_STAGES:
                raise ConfigError(f"unknown post stage {s!r}; choose from {', '.join(POST_STAGES)}")
        if "rejoin" in self.stages:
            i = self.stages.index("rejoin")
            if "split-suffix" not in self.stages[:i]:
                raise ConfigError("stage 'rejoin' requires 'split-suffix' earlier in the stage list")
        if "rejoin" in self.post_stages and "split-suffix" not in self.stages:
            raise ConfigError("post stage 'rejoin' requires 'split-suffix' among the stages")
        if self.stages and (self.source is None or self.target is None):
            raise ConfigError("'source' and 'target' are required when stages are configured")
        if self.post_stages and self.decoder_output is None:
            raise ConfigError("post stages need 'decoder_output'")
        try:
            FilterPolicy(self.max_words, self.max_ratio)
        except (ValueError, SmtkitError) as exc:
            raise ConfigError(f"invalid filter policy: {exc}") from None
        if not self.marker:
            raise ConfigError("marker must be nonempty")
        needed = {k for s in self.stages for k in STAGE_RESOURCES.get(s, ())}
        needed |= {k for s in self.post_stages for k in POST_RESOURCES.get(s, ())}
        for key in sorted(needed):
            if getattr(self, key) is None:
                raise ConfigError(f"missing resource {key!r} required by the configured stages")
        if check_files:
            for key in RESOURCE_KEYS:
                value = getattr(self, key)
                if key in ("stem_rules_src", "stem_rules_tgt") and value in (None, "english", "hindi"):
                    continue
                if value is not None and not os.path.isfile(self.resolve(value)):
                    raise ConfigError(f"resource file for {key!r} not found: {value}")
            for key in ("source", "target"):
                value = getattr(self, key)
                if value is not None and self.stages and not os.path.isfile(self.resolve(value)):
                    raise ConfigError(f"input file for {key!r} not found: {value}")
        return self

    def canonical_text(self):
        """Deterministic rendering used for hashing."""
        skip = {"base_dir"}
        lines = []
        for key in sorted(self.__dataclass_fields__):
            if key in skip:
                continue
            value = getattr(self, key)
            if isinstance(value, tuple):
                value = " ".join(value)
            lines.append(f"{key} = {'' if value is None else value}")
        return "\n".join(lines) + "\n"

    @property
    def hash(self):
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()


@dataclass
class StageEntry:
    stage: str
    version: str
    inputs: list
    outputs: list
    pairs_in: int
    pairs_out: int
    started: float = 0.0
    finished: float = 0.0


@dataclass
class RunManifest:
    config_hash: str
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    stages: list = field(default_factory=list)
    status: str = "running"
    error: str = None
    started: float = field(default_factory=time.time)
    finished: float = None

    def add(self, entry):
        if entry.stage != "filter" and entry.pairs_in != entry.pairs_out:
            raise InvariantError(f"stage {entry.stage!r} changed the pair count {entry.pairs_in} -> {entry.pairs_out}")
        if self.stages and self.stages[-1].pairs_out != entry.pairs_in and entry.stage not in POST_STAGES:
            raise InvariantError(
                f"stage {entry.stage!r} received {entry.pairs_in} pairs but the previous stage produced {self.stages[-1].pairs_out}"
            )
        self.stages.append(entry)

    def to_dict(self, timestamps=True):
        d = {
            "config_hash": self.config_hash,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "status": self.status,
            "error": self.error,
            "stages": [],
        }
        for e in self.stages:
            ed = dict(e.__dict__)
            if not timestamps:
                ed.pop("started")
                ed.pop("finished")
            d["stages"].append(ed)
        if timestamps:
            d["started"] = self.started
            d["finished"] = self.finished
        return d

    @property
    def hash(self):
        """Hash of everything except timestamps."""
        blob = json.dumps(self.to_dict(timestamps=False), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({**self.to_dict(), "manifest_hash": self.hash}, fh, indent=2, ensure_ascii=False, sort_keys=True)
            fh.write("\n")


# -- stages ------------------------------------------------------------------


class _State:
    """In-flight corpus: raw lines before tokenization, token tuples after."""

    def __init__(self, src, tgt, ids):
        self.src = src
        self.tgt = tgt
        self.ids = ids

    def __len__(self):
        return len(self.src)


def _load_state(source, target):
    src = read_lines(source)
    tgt = read_lines(target)
    if len(src) != len(tgt):
        raise DataError(
            f"line count mismatch: {len(src)} source vs {len(tgt)} target lines",
            line=min(len(src), len(tgt)) + 1,
            path=target if len(tgt) < len(src) else source,
        )
    return _State([tuple(s.split()) for s in src], [tuple(t.split()) for t in tgt], list(range(len(src)))), src, tgt


def _stage_normalize(state, cfg, raw):
    src_raw, tgt_raw = raw
    return _State(
        [tuple(normalize_text(x, cfg.source_script).split()) for x in src_raw],
        [tuple(normalize_text(x, cfg.target_script).split()) for x in tgt_raw],
        state.ids,
    ), {}


def _stage_tokenize(state, cfg, raw):
    src = [tokenize(" ".join(s), cfg.source_script) for s in state.src]
    tgt = [tokenize(" ".join(t), cfg.target_script) for t in state.tgt]
    return _State(src, tgt, state.ids), {}


def _stage_filter(state, cfg, raw):
    policy = FilterPolicy(cfg.max_words, cfg.max_ratio)
    src, tgt, ids, removed = [], [], [], []
    for s, t, i in zip(state.src, state.tgt, state.ids):
        if violates(len(s), len(t), policy):
            removed.append(i)
        else:
            src.append(s)
            tgt.append(t)
            ids.append(i)
    return _State(src, tgt, ids), {"removed_ids": removed}


def _stage_reorder(state, cfg, raw):
    rules = RuleSet.from_file(cfg.resolve(cfg.rules))
    trees = read_lines(cfg.resolve(cfg.trees))
    out = []
    for s, i in zip(state.src, state.ids):
        if i >= len(trees):
            raise DataError(f"no parse tree for sentence {i + 1}", line=i + 1, path=cfg.trees)
        try:
            tree = parse_bracketed(trees[i])
        except DataError as exc:
            raise DataError(str(exc), line=i + 1, path=cfg.trees) from None
        fringe = linearize(tree)
        if fringe != tuple(s):
            raise DataError(
                f"tree leaves {' '.join(fringe)!r} do not match the source sentence {' '.join(s)!r}",
                line=i + 1,
                path=cfg.trees,
            )
        out.append(linearize(apply_rules(tree, rules)))
    return _State(out, state.tgt, state.ids), {}


def _stage_split_suffix(state, cfg, raw):
    table = SuffixTable.from_file(cfg.resolve(cfg.suffix_table), cfg.marker)
    tgt = []
    for n, t in enumerate(state.tgt, 1):
        try:
            tgt.append(split_sentence(t, table))
        except DataError as exc:
            raise DataError(str(exc), line=n) from None
    return _State(state.src, tgt, state.ids), {}


def _rules(spec, cfg):
    if spec is None:
        return None
    if spec in ("english", "hindi"):
        return StemRuleTable.shipped(spec)
    return StemRuleTable.from_file(cfg.resolve(spec))


def _stage_stem(state, cfg, raw):
    src_rules, tgt_rules = _rules(cfg.stem_rules_src, cfg), _rules(cfg.stem_rules_tgt, cfg)
    factors = {
        "src.stem": [stem_sentence(s, src_rules) if src_rules else s for s in state.src],
        "tgt.stem": [stem_sentence(t, tgt_rules) if tgt_rules else t for t in state.tgt],
    }
    return state, {"factors": factors}


def _stage_rejoin(state, cfg, raw):
    return _State(state.src, [rejoin(t, cfg.marker) for t in state.tgt], state.ids), {}


STAGE_FUNCS = {
    "normalize": _stage_normalize,
    "tokenize": _stage_tokenize,
    "filter": _stage_filter,
    "reorder": _stage_reorder,
    "split-suffix": _stage_split_suffix,
    "stem": _stage_stem,
    "rejoin": _stage_rejoin,
}


def _write_state(state, out_dir, prefix, extra):
    outputs = []
    src_path = os.path.join(out_dir, f"{prefix}.src")
    tgt_path = os.path.join(out_dir, f"{prefix}.tgt")
    write_sentences(src_path, state.src)
    write_sentences(tgt_path, state.tgt)
    outputs += [src_path, tgt_path]
    for suffix, sentences in extra.get("factors", {}).items():
        path = os.path.join(out_dir, f"{prefix}.{suffix}")
        write_sentences(path, sentences)
        outputs.append(path)
    if "removed_ids" in extra:
        path = os.path.join(out_dir, f"{prefix}.removed")
        write_lines(path, (str(i + 1) for i in extra["removed_ids"]))
        outputs.append(path)
    ids_path = os.path.join(out_dir, f"{prefix}.ids")
    write_lines(ids_path, (str(i + 1) for i in state.ids))
    outputs.append(ids_path)
    return outputs


def run_stage(name, config, inputs, out_dir=None, prefix=None, manifest=None, _state=None, _raw=None):
    """Run one stage on ``inputs = (source_path, target_path)``.

    Returns ``(output_paths, StageEntry)``; the entry is also appended to
    ``manifest`` when one is given.
    """
    if name not in STAGE_FUNCS:
        raise ConfigError(f"unknown stage {name!r}; choose from {', '.join(STAGES)}")
    out_dir = out_dir or config.resolve(config.output_dir)
    os.makedirs(out_dir, exist_ok=True)
    started = time.time()
    if _state is None:
        _state, raw_src, raw_tgt = _load_state(*inputs)
        _raw = (raw_src, raw_tgt)
    n_in = len(_state)
    state, extra = STAGE_FUNCS[name](_state, config, _raw)
    outputs = _write_state(state, out_dir, prefix or name, extra)
    entry = StageEntry(name, STAGE_VERSION, list(inputs), outputs, n_in, len(state), started, time.time())
    if manifest is not None:
        manifest.add(entry)
    run_stage.last_state = state
    return outputs, entry


def _post_transliterate(lines, cfg):
    model = CharTransModel.load(cfg.resolve(cfg.translit_model))
    lm = NGramModel.read_arpa(cfg.resolve(cfg.lm))
    vocab = set(read_lines(cfg.resolve(cfg.vocab)))
    return [replace_oovs(s, find_oovs(s, vocab), model, lm, k=cfg.k) if s else s for s in lines]


def run_post(config, manifest=None, out_dir=None):
    out_dir = out_dir or config.resolve(config.output_dir)
    os.makedirs(out_dir, exist_ok=True)
    path = config.resolve(config.decoder_output)
    lines = read_sentences(path)
    outputs = []
    for name in config.post_stages:
        started = time.time()
        n_in = len(lines)
        if name == "rejoin":
            lines = [rejoin(s, config.marker) for s in lines]
        else:
            lines = _post_transliterate(lines, config)
        out_path = os.path.join(out_dir, f"post-{name}.hyp")
        write_sentences(out_path, lines)
        entry = StageEntry(name, STAGE_VERSION, [path], [out_path], n_in, len(lines), started, time.time())
        if manifest is not None:
            manifest.stages.append(entry)
        outputs.append(out_path)
        path = out_path
    return outputs


def run_pipeline(config, manifest_path=None):
    """Run every configured stage in order.

    On the first error the manifest is marked failed, written, and the
    error re-raised; outputs of completed stages stay on disk.
    """
    config.validate()
    out_dir = config.resolve(config.output_dir)
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(config_hash=config.hash)
    manifest_path = manifest_path or os.path.join(out_dir, "manifest.json")
    try:
        if config.stages:
            src, tgt = config.resolve(config.source), config.resolve(config.target)
            manifest.inputs = [src, tgt]
            state, raw_src, raw_tgt = _load_state(src, tgt)
            raw = (raw_src, raw_tgt)
            inputs = [src, tgt]
            for n, name in enumerate(config.stages, 1):
                outputs, _ = run_stage(name, config, inputs, out_dir, f"{n:02d}-{name}", manifest, state, raw)
                state = run_stage.last_state
                inputs = outputs[:2]
            manifest.outputs = list(inputs)
        if config.post_stages:
            manifest.outputs += run_post(config, manifest, out_dir)
        manifest.status = "ok"
    except Exception as exc:
        manifest.status = "failed"
        manifest.error = str(exc)
        raise
    finally:
        manifest.finished = time.time()
        manifest.write(manifest_path)
    return manifest
