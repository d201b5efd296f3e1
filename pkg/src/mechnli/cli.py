"""Command-line pipeline: each stage reads and writes line-delimited JSON.

    extract   corpus file        -> premise/conclusion pairs
    perturb   pairs              -> instance groups with rule-based negatives
    train-lm  pairs              -> bundled n-gram model file
    decode    pairs + model      -> constrained generation candidates
    filter    candidates + groups-> groups extended with accepted generations
    assemble  groups             -> dataset instances + statistics
    stats     dataset            -> statistics recomputed from instances
    eval      dataset + preds    -> evaluation report

Every stage writes a manifest next to its output recording the tool
version, a config hash, the seed, and record counts; the timestamp is the
single non-deterministic field. Exit codes: 0 success, 1 usage, 2 input
schema error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import functools
import hashlib
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .bridge import BRIDGE_URL_ENV, BridgeScorer, bridge_from_env
from .corpus import (
    EntityMention,
    Role,
    Sentence,
    SupportingSet,
    parse_marked,
    read_corpus,
    render_marked,
)
from .dataset import (
    SPLITS,
    DatasetStats,
    InstanceGroup,
    SplitPolicy,
    assemble,
    read_instances,
    write_instances,
)
from .decoding import (
    DESK_CONFIG,
    PAPER_CONFIG,
    ConstraintSet,
    DecoderConfig,
    build_ng_constraints,
    build_sen_constraints,
    build_sre_constraints,
    decode,
)
from .entities import EntityPool, LexiconTyper, in_text_candidates
from .errors import IoFailure, MechNliError, NoHypothesis, SchemaViolation
from .evaluate import evaluate, write_histogram_svg
from .extract import DEFAULT_PREMISE_BOUNDS, PhraseTable, split_abstract
from .filters import (
    FilterConfig,
    GndScheme,
    KeywordRelationPredictor,
    TokenCosineSimilarity,
    filter_gen,
    filter_gnd,
)
from .lm import NGramLM, train_ngram
from .perturb import (
    AntonymLexicon,
    NegationRules,
    PerturbationKind,
    PerturbResources,
    applicability,
    default_antonyms,
    default_negation_rules,
    kind_from_label,
    perturb_all,
)
from .tokenization import detokenize, tokenize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCHEMA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract is 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values: dict[str, str] = {}
    try:
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            if not value:
                raise SchemaViolation(0, f"bad config line: {raw!r}")
            values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise IoFailure(f"cannot read config file {path}: {exc}") from exc
    return values


def _setting(args, config: dict[str, str], name: str, default, cast=str):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return cast(config[name])
    return default


def _write_jsonl(path: str | Path, records) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
            count += 1
    return count


def _read_jsonl(path: str | Path) -> list[dict]:
    out = []
    try:
        with Path(path).open("r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise SchemaViolation(line_no, f"invalid JSON: {exc.msg}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return out


def _manifest(out_path: str | Path, command: str, settings: dict, counts: dict) -> None:
    serialized = json.dumps(settings, sort_keys=True)
    manifest = {
        "tool": "mechnli",
        "version": __version__,
        "command": command,
        "config_hash": hashlib.sha256(serialized.encode("utf-8")).hexdigest(),
        "settings": settings,
        "counts": counts,
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resources_from(args, config) -> PerturbResources:
    typer = (
        LexiconTyper.from_file(args.lexicon)
        if getattr(args, "lexicon", None)
        else LexiconTyper()
    )
    pool = EntityPool.from_file(args.pool) if getattr(args, "pool", None) else None
    antonyms = (
        AntonymLexicon.from_file(args.antonyms)
        if getattr(args, "antonyms", None)
        else default_antonyms()
    )
    rules = (
        NegationRules.from_file(args.negations)
        if getattr(args, "negations", None)
        else default_negation_rules()
    )
    return PerturbResources(typer=typer, pool=pool, antonyms=antonyms, negation_rules=rules)


# --- stages ------------------------------------------------------------------


def _cmd_extract(args) -> int:
    config = _read_config(args.config)
    bounds = (
        int(_setting(args, config, "min_premise", DEFAULT_PREMISE_BOUNDS[0], int)),
        int(_setting(args, config, "max_premise", DEFAULT_PREMISE_BOUNDS[1], int)),
    )
    table = PhraseTable.from_file(args.phrases) if args.phrases else PhraseTable()
    abstracts, violations = read_corpus(args.corpus, strict=args.strict)
    for violation in violations:
        print(f"skipped: {violation}", file=sys.stderr)
    records = []
    for abstract in abstracts:
        result = split_abstract(abstract, table, bounds)
        if result is None:
            continue
        records.append(
            {
                "abstract_id": result.abstract_id,
                "matched_phrase": result.matched_phrase,
                "premise_sentences": [s.text for s in result.supporting.sentences],
                "mentions": [
                    {
                        "surface": m.surface,
                        "type": m.type_label,
                        "sentence": m.sentence_index,
                        "start": m.start,
                        "end": m.end,
                    }
                    for m in result.supporting.mentions
                ],
                "conclusion": render_marked(result.conclusion),
            }
        )
    written = _write_jsonl(args.out, records)
    _manifest(
        args.out,
        "extract",
        {"corpus": str(args.corpus), "bounds": list(bounds), "strict": args.strict},
        {"read": len(abstracts), "skipped_invalid": len(violations), "extracted": written},
    )
    return EXIT_OK


def _pair_context(record):
    sentences = tuple(
        Sentence(i, text) for i, text in enumerate(record["premise_sentences"])
    )
    mentions = tuple(
        EntityMention(
            surface=m["surface"],
            type_label=m.get("type", ""),
            sentence_index=m["sentence"],
            start=m["start"],
            end=m["end"],
        )
        for m in record.get("mentions", [])
    )
    supporting = SupportingSet(sentences=sentences, mentions=mentions)
    conclusion = parse_marked(record["conclusion"])
    return supporting, conclusion


def _parallel_map(func, items: list, jobs: int) -> list:
    """Order-preserving map, fanned out over processes when jobs > 1."""
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _perturb_record(record: dict, seed, resources, wanted) -> dict:
    supporting, conclusion = _pair_context(record)
    produced = perturb_all(conclusion, supporting, resources, rng_seed=seed, kinds=wanted)
    applicable = applicability(conclusion, supporting, resources)
    return {
        "group_id": record["abstract_id"],
        "source_abstract_id": record["abstract_id"],
        "premise": " ".join(record["premise_sentences"]),
        "positive": record["conclusion"],
        "negatives": [
            {"category": kind.value, "hypothesis": render_marked(out)}
            for kind, out in sorted(produced.items(), key=lambda kv: kv[0].value)
        ],
        "applicable": sorted(k.value for k in applicable),
    }


def _cmd_perturb(args) -> int:
    config = _read_config(args.config)
    seed = _setting(args, config, "seed", 0, int)
    jobs = int(_setting(args, config, "jobs", 1, int))
    resources = _resources_from(args, config)
    wanted = (
        frozenset(kind_from_label(k) for k in args.kinds.split(","))
        if args.kinds
        else frozenset(PerturbationKind)
    )
    pairs = _read_jsonl(args.pairs)
    worker = functools.partial(
        _perturb_record, seed=seed, resources=resources, wanted=wanted
    )
    groups = _parallel_map(worker, pairs, jobs)
    written = _write_jsonl(args.out, groups)
    _manifest(
        args.out,
        "perturb",
        {"pairs": str(args.pairs), "seed": seed, "kinds": sorted(k.value for k in wanted)},
        {"groups": written},
    )
    return EXIT_OK


def _cmd_train_lm(args) -> int:
    config = _read_config(args.config)
    order = int(_setting(args, config, "order", 3, int))
    discount = float(_setting(args, config, "discount", 0.4, float))
    pairs = _read_jsonl(args.pairs)
    sequences = []
    for record in pairs:
        for sentence in record["premise_sentences"]:
            sequences.append(tokenize(sentence))
        sequences.append(tokenize(record["conclusion"]))
    model = train_ngram(sequences, order=order, discount=discount)
    model.save(args.out)
    _manifest(
        args.out,
        "train-lm",
        {"pairs": str(args.pairs), "order": order, "discount": discount},
        {"sequences": len(sequences), "vocab": len(model.vocab())},
    )
    return EXIT_OK


_SCHEMES = {
    "gen": None,
    "sen": GndScheme.SEN,
    "sre": GndScheme.SRE,
    "ng": GndScheme.NG,
}


def _decoder_config(args, config) -> DecoderConfig:
    if args.paper_config:
        base = PAPER_CONFIG
    else:
        base = DESK_CONFIG
    overrides = {}
    for name in ("beam_size", "prune_factor", "min_len", "max_len", "ngram_block"):
        value = _setting(args, config, name, None, int)
        if value is not None:
            overrides[name] = int(value)
    return DecoderConfig(**{**base.__dict__, **overrides}) if overrides else base


def _decode_record(
    record: dict, scheme: str, seed, decoder_config, scorer, resources, top_k: int
) -> dict | None:
    supporting, conclusion = _pair_context(record)
    if scheme == "sen":
        constraints = build_sen_constraints(conclusion)
    elif scheme == "ng":
        constraints = build_ng_constraints(conclusion)
    elif scheme == "sre":
        candidates = []
        for role in (Role.REGULATOR, Role.REGULATED):
            for surface in in_text_candidates(
                conclusion, supporting, role, resources.typer
            ):
                candidates.append((role, surface))
        if not candidates:
            return None
        role, surface = random.Random(f"{seed}:{record['abstract_id']}").choice(
            candidates
        )
        constraints = build_sre_constraints(conclusion, surface, role)
    else:
        constraints = ConstraintSet()
    prompt = tuple(
        tok for sentence in record["premise_sentences"] for tok in tokenize(sentence)
    )
    try:
        results = decode(scorer, constraints, decoder_config, prompt=prompt)
    except NoHypothesis:
        results = []
    return {
        "group_id": record["abstract_id"],
        "scheme": scheme,
        "gold": record["conclusion"],
        "constraints": constraints.to_json(),
        "candidates": [
            {
                "tokens": list(r.tokens),
                "text": detokenize(r.tokens),
                "model_score": r.model_score,
                "satisfied_clauses": r.satisfied_clauses,
                "fully_satisfied": r.fully_satisfied,
            }
            for r in results[:top_k]
        ],
    }


def _cmd_decode(args) -> int:
    config = _read_config(args.config)
    seed = _setting(args, config, "seed", 0, int)
    jobs = int(_setting(args, config, "jobs", 1, int))
    scheme = args.scheme
    decoder_config = _decoder_config(args, config)
    bridge = bridge_from_env()
    model = NGramLM.load(args.lm) if args.lm else None
    pairs = _read_jsonl(args.pairs)
    resources = _resources_from(args, config)
    scorer = BridgeScorer(bridge) if bridge is not None else model
    if scorer is None:
        raise IoFailure("decode needs --lm or a bridge endpoint")
    worker = functools.partial(
        _decode_record,
        scheme=scheme,
        seed=seed,
        decoder_config=decoder_config,
        scorer=scorer,
        resources=resources,
        top_k=args.top_k,
    )
    records = [r for r in _parallel_map(worker, pairs, jobs) if r is not None]
    written = _write_jsonl(args.out, records)
    _manifest(
        args.out,
        "decode",
        {
            "pairs": str(args.pairs),
            "scheme": scheme,
            "seed": seed,
            "decoder": dict(sorted(decoder_config.__dict__.items())),
            "scorer": "bridge" if bridge is not None else "ngram",
        },
        {"records": written},
    )
    return EXIT_OK


def _cmd_filter(args) -> int:
    config = _read_config(args.config)
    filter_config = FilterConfig(
        quality_threshold=float(_setting(args, config, "quality_threshold", 0.45, float)),
        similarity_threshold=float(
            _setting(args, config, "similarity_threshold", 0.9, float)
        ),
    )
    bridge = bridge_from_env()
    if bridge is not None:
        from .bridge import BridgeRelationPredictor, BridgeSimilarity

        similarity = BridgeSimilarity(bridge)
        relation = BridgeRelationPredictor(bridge)
    else:
        similarity = TokenCosineSimilarity()
        relation = (
            KeywordRelationPredictor.from_file(args.relations)
            if args.relations
            else KeywordRelationPredictor()
        )
    generations = _read_jsonl(args.gens)
    groups = {g["group_id"]: g for g in _read_jsonl(args.groups)}
    accepted = 0
    for record in generations:
        group = groups.get(record["group_id"])
        if group is None:
            continue
        gold = parse_marked(record["gold"])
        scheme = _SCHEMES[record["scheme"]]
        constraints = ConstraintSet.from_json(record["constraints"])
        for candidate in record["candidates"]:
            text = candidate["text"]
            try:
                if scheme is None:
                    ok = filter_gen(
                        text, gold, group["premise"], similarity, relation, filter_config
                    )
                    category = PerturbationKind.GEN.value
                else:
                    ok = filter_gnd(
                        text, gold.plain_text, scheme, constraints, similarity, filter_config
                    )
                    category = PerturbationKind.GEN_ND.value
            except MechNliError:
                continue
            if ok:
                group["negatives"].append({"category": category, "hypothesis": text})
                applicable = set(group.get("applicable", []))
                applicable.add(category)
                group["applicable"] = sorted(applicable)
                accepted += 1
                break
    written = _write_jsonl(args.out, [groups[k] for k in sorted(groups)])
    _manifest(
        args.out,
        "filter",
        {
            "gens": str(args.gens),
            "groups": str(args.groups),
            "quality_threshold": filter_config.quality_threshold,
            "similarity_threshold": filter_config.similarity_threshold,
        },
        {"groups": written, "accepted": accepted},
    )
    return EXIT_OK


def _groups_from_records(records) -> list[InstanceGroup]:
    groups = []
    for record in records:
        groups.append(
            InstanceGroup(
                group_id=record["group_id"],
                premise=record["premise"],
                positive_hypothesis=record["positive"],
                negatives=tuple(
                    (n["category"], n["hypothesis"]) for n in record.get("negatives", [])
                ),
                applicable=tuple(record.get("applicable", ())),
                source_abstract_id=record.get("source_abstract_id", ""),
            )
        )
    return groups


def _cmd_assemble(args) -> int:
    config = _read_config(args.config)
    seed = _setting(args, config, "seed", 0, int)
    cap = int(_setting(args, config, "cap", 500, int)) if args.balanced else None
    ratios = tuple(
        float(x) for x in _setting(args, config, "ratios", "0.7,0.15,0.15").split(",")
    )
    groups = _groups_from_records(_read_jsonl(args.groups))
    if args.splits:
        assignment = {
            r["group_id"]: r["split"] for r in _read_jsonl(args.splits)
        }
    else:
        assignment = SplitPolicy.hash_assignment(
            [g.group_id for g in groups], ratios=ratios, seed=seed
        )
    policy = SplitPolicy(assignment=assignment, balanced_cap=cap)
    instances, stats = assemble(groups, policy, seed=seed)
    written = write_instances(instances, args.out)
    stats_path = args.stats or (str(args.out) + ".stats.json")
    Path(stats_path).write_text(
        json.dumps(stats.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _write_jsonl(
        str(args.out) + ".splits.jsonl",
        (
            {"group_id": g.group_id, "split": assignment[g.group_id]}
            for g in sorted(groups, key=lambda g: g.group_id)
        ),
    )
    _manifest(
        args.out,
        "assemble",
        {
            "groups": str(args.groups),
            "seed": seed,
            "balanced_cap": cap,
            "ratios": list(ratios),
            "splits_file": str(args.splits) if args.splits else None,
        },
        {"groups": len(groups), "instances": written},
    )
    return EXIT_OK


def _cmd_stats(args) -> int:
    instances = read_instances(args.dataset)
    # Recompute per-category counts from the instance file alone; split
    # membership comes from a sidecar assignment or defaults to train.
    assignment = {}
    splits_path = args.splits or (
        str(args.dataset) + ".splits.jsonl"
        if Path(str(args.dataset) + ".splits.jsonl").exists()
        else None
    )
    if splits_path:
        assignment = {r["group_id"]: r["split"] for r in _read_jsonl(splits_path)}
    stats = DatasetStats()
    groups_seen: dict[str, set] = {s: set() for s in SPLITS}
    for inst in instances:
        split = assignment.get(inst.group_id, "train")
        stats.counts[split][inst.category] = stats.counts[split].get(inst.category, 0) + 1
        groups_seen[split].add(inst.group_id)
    for split in SPLITS:
        stats.unique_groups[split] = len(groups_seen[split])
    payload = stats.to_dict()
    Path(args.out).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(stats.render_table())
    _manifest(
        args.out,
        "stats",
        {"dataset": str(args.dataset)},
        {"instances": len(instances)},
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    report = evaluate(args.dataset, args.predictions)
    payload = report.to_dict()
    if args.out:
        Path(args.out).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        _manifest(
            args.out,
            "eval",
            {"dataset": str(args.dataset), "predictions": str(args.predictions)},
            {"groups": len(report.consistency)},
        )
    if args.histogram_svg:
        write_histogram_svg(report.consistency_histogram(), args.histogram_svg)
    print(report.render_table())
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mechnli", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mechnli {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--config", help="flat key=value config file; flags override")
        return p

    p = add("extract", _cmd_extract, help="split abstracts into premise/conclusion pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--phrases", help="phrase table file, one lowercase phrase per line")
    p.add_argument("--min-premise", dest="min_premise", type=int)
    p.add_argument("--max-premise", dest="max_premise", type=int)
    p.add_argument("--strict", action="store_true", help="fail on the first bad record")

    p = add("perturb", _cmd_perturb, help="generate rule-based negatives per pair")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="parallel workers; output order is stable")
    p.add_argument("--kinds", help="comma-separated kind labels, e.g. SEN,SEP,VNeg")
    p.add_argument("--lexicon", help="entity type lexicon: surface<TAB>type")
    p.add_argument("--pool", help="entity pool file: surface<TAB>type")
    p.add_argument("--antonyms", help="antonym lexicon file")
    p.add_argument("--negations", help="negation rules file")

    p = add("train-lm", _cmd_train_lm, help="train the bundled n-gram model")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int)
    p.add_argument("--discount", type=float)

    p = add("decode", _cmd_decode, help="constrained generation per pair")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lm", help=f"model file; omit to use the {BRIDGE_URL_ENV} bridge")
    p.add_argument("--scheme", choices=sorted(_SCHEMES), required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="parallel workers; output order is stable")
    p.add_argument("--top-k", dest="top_k", type=int, default=4)
    p.add_argument("--paper-config", action="store_true", help="full-scale search preset")
    p.add_argument("--desk-config", action="store_true", help="small search preset (default)")
    p.add_argument("--beam-size", dest="beam_size", type=int)
    p.add_argument("--prune-factor", dest="prune_factor", type=int)
    p.add_argument("--min-len", dest="min_len", type=int)
    p.add_argument("--max-len", dest="max_len", type=int)
    p.add_argument("--ngram-block", dest="ngram_block", type=int)
    p.add_argument("--lexicon")
    p.add_argument("--pool")

    p = add("filter", _cmd_filter, help="accept generations as negatives")
    p.add_argument("--gens", required=True)
    p.add_argument("--groups", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda", dest="quality_threshold", type=float)
    p.add_argument("--delta", dest="similarity_threshold", type=float)
    p.add_argument("--relations", help="relation keyword file: label<TAB>keyword")

    p = add("assemble", _cmd_assemble, help="emit dataset splits and statistics")
    p.add_argument("--groups", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stats")
    p.add_argument("--seed", type=int)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--cap", type=int)
    p.add_argument("--ratios")
    p.add_argument("--splits", help="explicit split file: {group_id, split} per line")

    p = add("stats", _cmd_stats, help="recompute statistics from a dataset file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--splits")

    p = add("eval", _cmd_eval, help="score a prediction file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out")
    p.add_argument("--histogram-svg", dest="histogram_svg")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SchemaViolation, IoFailure) as exc:
        print(f"mechnli: input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except MechNliError as exc:
        print(f"mechnli: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"mechnli: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
