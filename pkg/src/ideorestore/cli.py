"""Command-line entry point wiring all stages.

One declarative YAML config drives a pipeline; each subcommand reads its
section, writes a run manifest into its output directory, and exits 0 on
success (nonzero with a structured error otherwise).
"""

from __future__ import annotations

import argparse
import copy
import glob
import json
import logging
import sys
from pathlib import Path

import numpy as np
import torch

from . import configio
from .corpus import (
    TransliterationTable,
    assign_splits,
    build_vocabulary,
    read_manifest,
    read_vocabulary,
    segment_corpus,
    write_manifest,
    write_vocabulary,
)
from .evaluation import (
    ImageOnlyPredictor,
    RestorerPredictor,
    TextOnlyPredictor,
    evaluate,
    format_report_table,
    mask_area_sweep,
    multi_mask_table,
    write_report_jsonl,
)
from .glyphsim import (
    CurriculumState,
    FontLibrary,
    GlyphSimulator,
    SimulationConfig,
    save_image,
)
from .model import (
    ImageOnlyClassifier,
    MultimodalRestorer,
    TokenCodec,
    load_checkpoint,
    save_checkpoint,
    vocabulary_hash,
)
from .model.checkpoint import KIND_IMAGE_CLASSIFIER, KIND_LANGUAGE_MODEL, KIND_RESTORER, restore_model
from .model.context_encoder import ContextEncoderConfig, MaskedLanguageModel
from .model.decoders import GlyphDecoderConfig
from .model.image_encoder import ImageEncoderConfig
from .model.restorer import RestorerConfig
from .rand import rng_for
from .toydata import ToyLanguage, ToyLanguageSpec, covered_letters
from .training import LMTrainConfig, TrainConfig, finetune_lm, pretrain_lm, train_restorer

logger = logging.getLogger("ideorestore")


# ---------------------------------------------------------------------------
# Shared loading helpers
# ---------------------------------------------------------------------------
def _fonts(cfg) -> FontLibrary:
    return FontLibrary.from_dir(configio.resolve_path(cfg, cfg.get("fonts_dir", ".")))


def _simulator(cfg) -> GlyphSimulator:
    sim_cfg = SimulationConfig.from_dict(cfg.get("simulation", {}))
    return GlyphSimulator(_fonts(cfg), sim_cfg)


def _artifact(cfg, key: str, default: str) -> Path:
    return configio.resolve_path(cfg, cfg.get("artifacts", {}).get(key, default))


def _load_corpus(cfg):
    corpus_dir = _artifact(cfg, "corpus_dir", "corpus")
    sentences = read_manifest(corpus_dir / "sentences.jsonl")
    vocab = read_vocabulary(corpus_dir / "vocab.tsv")
    codec = TokenCodec.from_vocabulary(vocab)
    splits = {
        "train": [s for s in sentences if s.split == "train"],
        "dev": [s for s in sentences if s.split == "dev"],
        "test": [s for s in sentences if s.split == "test"],
    }
    return splits, vocab, codec


def _model_configs(cfg, vocab_size: int):
    m = cfg.get("model", {})
    dim = m.get("dim", 128)
    enc = ContextEncoderConfig(vocab_size=vocab_size, dim=dim, **m.get("encoder", {}))
    img_kwargs = dict(m.get("image", {}))
    if "channels" in img_kwargs:
        img_kwargs["channels"] = tuple(img_kwargs["channels"])
    img = ImageEncoderConfig(dim=dim, **img_kwargs)
    dec = GlyphDecoderConfig(dim=dim, **m.get("decoder", {}))
    return enc, img, dec


def _lm_cfg(cfg, section: str, seed: int) -> LMTrainConfig:
    kwargs = dict(cfg.get(section, {}))
    kwargs.setdefault("seed", seed)
    return LMTrainConfig(**kwargs)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_corpus_build(cfg, args) -> int:
    out = Path(args.out) if args.out else _artifact(cfg, "corpus_dir", "corpus")
    ccfg = cfg.get("corpus", {})
    source = ccfg.get("source", {})
    kind = source.get("kind", "files")
    input_files: list[Path] = []
    if kind == "files":
        paths: list[Path] = []
        for pattern in source.get("paths", []):
            paths.extend(sorted(Path(p) for p in glob.glob(str(configio.resolve_path(cfg, pattern)))))
        if not paths:
            raise FileNotFoundError("no corpus files matched")
        input_files = paths
        docs = [p.read_text(encoding="utf-8") for p in paths]
    elif kind == "synthetic":
        fonts = _fonts(cfg)
        lang_kwargs = dict(source.get("language", {}))
        if "sentence_len" in lang_kwargs:
            lang_kwargs["sentence_len"] = tuple(lang_kwargs["sentence_len"])
        spec = ToyLanguageSpec(**lang_kwargs)
        chars = covered_letters(fonts, spec.n_chars, seed=spec.seed)
        docs = ToyLanguage(spec, chars).documents(source.get("n_sentences", 6000))
    else:
        raise ValueError(f"unknown corpus source kind {kind!r}")

    table = None
    if ccfg.get("transliteration"):
        table_path = configio.resolve_path(cfg, ccfg["transliteration"])
        mapping = {}
        for line in table_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                src, dst = line.split("\t")
                mapping[src] = dst
        table = TransliterationTable(mapping)
        input_files.append(table_path)

    sentences = []
    for i, doc in enumerate(docs):
        sentences.extend(
            segment_corpus(doc, max_len=ccfg.get("max_len", 50), table=table, id_prefix=f"d{i:04d}s", id_start=0)
        )
    rng = rng_for(args.seed, 0x5EED)
    sentences = assign_splits(sentences, ccfg.get("dev_size", 500), ccfg.get("test_size", 500), rng)
    vocab = build_vocabulary(sentences, mask_symbol=ccfg.get("mask_symbol", "□"))

    out.mkdir(parents=True, exist_ok=True)
    write_manifest(sentences, out / "sentences.jsonl")
    write_vocabulary(vocab, out / "vocab.tsv")
    configio.RunManifest.build("corpus-build", cfg, args.seed, out, input_files).write()
    n_train = sum(1 for s in sentences if s.split == "train")
    print(f"corpus: {len(sentences)} sentences ({n_train} train), vocabulary {len(vocab)} characters -> {out}")
    return 0


def cmd_simulate_preview(cfg, args) -> int:
    out = Path(args.out) if args.out else configio.resolve_path(cfg, "preview")
    sim = _simulator(cfg)
    char = args.char
    if not sim.can_render(char):
        raise ValueError(f"no font coverage for {char!r}")
    rows = []
    k = cfg.get("train", {}).get("curriculum_epochs", 10)
    stages = [1, max(1, k // 2), k]
    for row in range(4):
        rng = rng_for(args.seed, row)
        font = sim.fonts.fonts_for(char)[int(rng.integers(len(sim.fonts.fonts_for(char))))]
        clean = sim.render_clean(char, font)
        cells = [clean]
        for epoch in stages:
            rng_stage = rng_for(args.seed, row, epoch)
            damaged, _ = sim.simulate(char, CurriculumState(epoch, k), rng_stage)
            cells.append(damaged)
        rows.append(np.concatenate(cells, axis=1))
    grid = np.concatenate(rows, axis=0)
    out.mkdir(parents=True, exist_ok=True)
    save_image(np.clip(grid, 0.0, 1.0), out / "preview.png")
    configio.RunManifest.build("simulate-preview", cfg, args.seed, out).write()
    print(f"wrote {out / 'preview.png'} (rows: samples; cols: clean render then damage at epochs {stages} of {k})")
    return 0


def cmd_pretrain_lm(cfg, args) -> int:
    # an explicit --out overrides the configured artifact location
    target = Path(args.out) / "pretrained.pt" if args.out else _artifact(cfg, "lm_pretrained", "lm/pretrained.pt")
    out = target.parent
    splits, vocab, codec = _load_corpus(cfg)
    enc_cfg, _, _ = _model_configs(cfg, codec.vocab_size)
    torch.manual_seed(args.seed)
    lm = MaskedLanguageModel(enc_cfg)
    out.mkdir(parents=True, exist_ok=True)
    history = pretrain_lm(
        splits["train"], splits["dev"], vocab, codec, lm,
        _lm_cfg(cfg, "lm_pretrain", args.seed), metrics_path=out / "pretrain-metrics.jsonl",
    )
    save_checkpoint(target, KIND_LANGUAGE_MODEL, enc_cfg.to_dict(), lm.state_dict(), vocabulary_hash(vocab), {"history": history})
    configio.RunManifest.build("pretrain-lm", cfg, args.seed, out).write()
    print(f"pretrained language model -> {target} (dev acc {history['dev_accuracy'][-1]:.4f})")
    return 0


def cmd_finetune_lm(cfg, args) -> int:
    target = Path(args.out) / "finetuned.pt" if args.out else _artifact(cfg, "lm_finetuned", "lm/finetuned.pt")
    out = target.parent
    splits, vocab, codec = _load_corpus(cfg)
    src = Path(args.out) / "pretrained.pt" if args.out else _artifact(cfg, "lm_pretrained", "lm/pretrained.pt")
    if not src.exists():
        src = _artifact(cfg, "lm_pretrained", "lm/pretrained.pt")
    lm = restore_model(load_checkpoint(src, vocabulary_hash(vocab)))
    out.mkdir(parents=True, exist_ok=True)
    history = finetune_lm(
        splits["train"], splits["dev"], vocab, codec, lm,
        _lm_cfg(cfg, "lm_finetune", args.seed), metrics_path=out / "finetune-metrics.jsonl",
    )
    save_checkpoint(target, KIND_LANGUAGE_MODEL, lm.cfg.to_dict(), lm.state_dict(), vocabulary_hash(vocab), {"history": history})
    configio.RunManifest.build("finetune-lm", cfg, args.seed, out, [src]).write()
    print(
        f"finetuned language model -> {target} "
        f"(dev acc {history['dev_accuracy_before']:.4f} -> {history['dev_accuracy_after']:.4f})"
    )
    return 0


def cmd_train_mmrm(cfg, args) -> int:
    out = Path(args.out) if args.out else _artifact(cfg, "restorer", "mmrm/best.pt").parent
    splits, vocab, codec = _load_corpus(cfg)
    vhash = vocabulary_hash(vocab)
    lm_path = _artifact(cfg, "lm_finetuned", "lm/finetuned.pt")
    lm = restore_model(load_checkpoint(lm_path, vhash))
    _, img_cfg, dec_cfg = _model_configs(cfg, codec.vocab_size)
    torch.manual_seed(args.seed)
    model = MultimodalRestorer.from_language_model(lm, img_cfg, dec_cfg)
    trunk_src = cfg.get("artifacts", {}).get("image_classifier")
    if trunk_src:
        trunk_path = configio.resolve_path(cfg, trunk_src)
        if trunk_path.exists():
            clf = restore_model(load_checkpoint(trunk_path, vhash))
            model.load_image_trunk(clf.trunk.state_dict())
            logger.info("image trunk warm-started from %s", trunk_path)
    train_kwargs = dict(cfg.get("train", {}))
    train_kwargs.setdefault("seed", args.seed)
    if args.workers is not None:
        train_kwargs["workers"] = args.workers
    tcfg = TrainConfig(**train_kwargs)
    sim = _simulator(cfg)
    result = train_restorer(model, sim, splits["train"], splits["dev"], vocab, codec, tcfg, out_dir=out)
    save_checkpoint(out / "best.pt", KIND_RESTORER, model.cfg.to_dict(), result.best_state, vhash,
                    {"history": result.history, "best_epoch": result.best_epoch, "train_config": tcfg.to_dict()})
    save_checkpoint(out / "final.pt", KIND_RESTORER, model.cfg.to_dict(), result.final_state, vhash,
                    {"history": result.history, "train_config": tcfg.to_dict()})
    configio.RunManifest.build("train-mmrm", cfg, args.seed, out, [lm_path]).write()
    print(
        f"trained restorer -> {out / 'best.pt'} "
        f"(best dev acc {result.best_dev_accuracy:.4f} at epoch {result.best_epoch}; "
        f"context encoder frozen: {result.checksum_before == result.checksum_after})"
    )
    return 0


def _predictor_for_checkpoint(path: Path, vocab, codec, cfg):
    ckpt = load_checkpoint(path, vocabulary_hash(vocab))
    model = restore_model(ckpt)
    if ckpt.kind == KIND_RESTORER:
        return RestorerPredictor(model), True
    if ckpt.kind == KIND_LANGUAGE_MODEL:
        return TextOnlyPredictor(model), False
    if ckpt.kind == KIND_IMAGE_CLASSIFIER:
        return ImageOnlyPredictor(model), True
    raise ValueError(f"cannot evaluate checkpoint kind {ckpt.kind!r}")


def cmd_evaluate(cfg, args) -> int:
    out = Path(args.out) if args.out else configio.resolve_path(cfg, "eval")
    splits, vocab, codec = _load_corpus(cfg)
    section = cfg.get("evaluate", {})
    ckpt_path = configio.resolve_path(cfg, section.get("checkpoint", str(_artifact(cfg, "restorer", "mmrm/best.pt"))))
    predictor, needs_sim = _predictor_for_checkpoint(ckpt_path, vocab, codec, cfg)
    sim = _simulator(cfg) if needs_sim else None
    report = evaluate(
        predictor,
        splits[section.get("split", "test")],
        vocab,
        codec,
        sim,
        n_masks=section.get("n_masks", 1),
        resamples=section.get("resamples", 30),
        seed=args.seed,
        batch_size=section.get("batch_size", 256),
    )
    out.mkdir(parents=True, exist_ok=True)
    write_report_jsonl({"model": report}, out / "report.jsonl")
    (out / "report.txt").write_text(format_report_table({"model": report}), encoding="utf-8")
    configio.RunManifest.build("evaluate", cfg, args.seed, out, [ckpt_path]).write()
    print(format_report_table({"model": report}), end="")
    print(f"(n={report.n_samples} positions x {report.n_resamples} resamples) -> {out}")
    return 0


def cmd_multi_mask_table(cfg, args) -> int:
    out = Path(args.out) if args.out else configio.resolve_path(cfg, "multi_mask")
    splits, vocab, codec = _load_corpus(cfg)
    section = cfg.get("multi_mask", {})
    ckpt_path = configio.resolve_path(cfg, section.get("checkpoint", str(_artifact(cfg, "restorer", "mmrm/best.pt"))))
    predictor, needs_sim = _predictor_for_checkpoint(ckpt_path, vocab, codec, cfg)
    sim = _simulator(cfg) if needs_sim else None
    table = multi_mask_table(
        predictor, splits[section.get("split", "test")], vocab, codec, sim,
        resamples=section.get("resamples", 30), seed=args.seed, batch_size=section.get("batch_size", 256),
    )
    out.mkdir(parents=True, exist_ok=True)
    write_report_jsonl(table, out / "table.jsonl")
    (out / "table.txt").write_text(format_report_table(table), encoding="utf-8")
    configio.RunManifest.build("multi-mask-table", cfg, args.seed, out, [ckpt_path]).write()
    print(format_report_table(table), end="")
    return 0


def cmd_mask_sweep(cfg, args) -> int:
    out = Path(args.out) if args.out else configio.resolve_path(cfg, "sweep")
    splits, vocab, codec = _load_corpus(cfg)
    vhash = vocabulary_hash(vocab)
    section = cfg.get("sweep", {})
    ckpt_path = configio.resolve_path(cfg, section.get("checkpoint", str(_artifact(cfg, "restorer", "mmrm/best.pt"))))
    lm_path = configio.resolve_path(cfg, section.get("lm_checkpoint", str(_artifact(cfg, "lm_finetuned", "lm/finetuned.pt"))))
    model = restore_model(load_checkpoint(ckpt_path, vhash))
    lm = restore_model(load_checkpoint(lm_path, vhash))
    fractions = tuple(section.get("fractions", [i / 10 for i in range(11)]))
    result = mask_area_sweep(
        RestorerPredictor(model), TextOnlyPredictor(lm),
        splits[section.get("split", "test")], vocab, codec, _simulator(cfg),
        fractions=fractions, resamples=section.get("resamples", 3), seed=args.seed,
    )
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.jsonl", "w", encoding="utf-8") as f:
        for frac, acc in result.points:
            f.write(json.dumps({"fraction": frac, "accuracy": acc}) + "\n")
        f.write(json.dumps({"lm_reference": result.lm_reference}) + "\n")
    lines = ["fraction\taccuracy"] + [f"{frac:.1f}\t{acc:.2f}" for frac, acc in result.points]
    lines.append(f"lm_reference\t{result.lm_reference:.2f}")
    (out / "sweep.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    configio.RunManifest.build("mask-sweep", cfg, args.seed, out, [ckpt_path, lm_path]).write()
    print("\n".join(lines))
    return 0


def cmd_serve(cfg, args) -> int:
    import uvicorn

    from .service import GapPredictor, SessionStore, create_app

    splits, vocab, codec = _load_corpus(cfg)
    vhash = vocabulary_hash(vocab)
    section = cfg.get("serve", {})
    ckpt_path = configio.resolve_path(cfg, section.get("checkpoint", str(_artifact(cfg, "restorer", "mmrm/best.pt"))))
    restorer = restore_model(load_checkpoint(ckpt_path, vhash))
    lm = None
    if section.get("lm_checkpoint") or cfg.get("artifacts", {}).get("lm_finetuned"):
        lm_path = configio.resolve_path(cfg, section.get("lm_checkpoint", str(_artifact(cfg, "lm_finetuned", "lm/finetuned.pt"))))
        if Path(lm_path).exists():
            lm = restore_model(load_checkpoint(lm_path, vhash))
    sim = _simulator(cfg)
    predictor = GapPredictor(restorer, lm, vocab, codec, sim)
    store = SessionStore(section.get("sessions_file"))
    app = create_app(store, {"default": predictor})
    host = section.get("host", "127.0.0.1")
    port = int(section.get("port", 8023))
    print(f"serving on http://{host}:{port}/v1 (checkpoint {ckpt_path.name})")
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


COMMANDS = {
    "corpus-build": cmd_corpus_build,
    "simulate-preview": cmd_simulate_preview,
    "pretrain-lm": cmd_pretrain_lm,
    "finetune-lm": cmd_finetune_lm,
    "train-mmrm": cmd_train_mmrm,
    "evaluate": cmd_evaluate,
    "multi-mask-table": cmd_multi_mask_table,
    "mask-sweep": cmd_mask_sweep,
    "serve": cmd_serve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ideorestore", description="Ancient ideograph restoration toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run config")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--workers", type=int, default=None, help="parallel simulation workers")
        p.add_argument("--out", default=None, help="output directory")
        if name == "simulate-preview":
            p.add_argument("--char", required=True, help="character to simulate")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = configio.load_config(args.config)
        if args.seed is None:
            args.seed = int(cfg.get("seed", 0))
        return COMMANDS[args.command](cfg, args)
    except Exception as e:  # structured error surface for scripts
        print(json.dumps({"code": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
