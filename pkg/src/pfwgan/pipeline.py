# -*- coding: utf-8 -*-
"""
Orchestration behind the command line: ingest, split, fit, train, generate, evaluate.

A run directory holds

    config.resolved.json   the validated configuration, presets and defaults filled in
    train_log.jsonl        one record per finished epoch
    checkpoints/           periodic and diagnostic checkpoints
    model.ckpt             the final checkpoint
    report.json            the evaluation report
    report.csv             one row per (dataset, model)
    plot/                  per-figure CSV files, when requested
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from pfwgan.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from pfwgan.config import RepetitionMode, RunConfig
from pfwgan.context import Context
from pfwgan.data.table import RawTable, SplitSpec, TableSchema, load_csv, split, write_csv
from pfwgan.data.transform import DataMatrix, TransformModel, encode, feature_weights, fit
from pfwgan.evaluate.report import evaluate_all, load_report, write_plot_data, write_report, write_report_rows
from pfwgan.exceptions import ConfigInvalid, IOFault, SchemaMismatch
from pfwgan.losses import PrivacyReference
from pfwgan.schemas.trainlog import append_record, read_log
from pfwgan.synthesize import generate
from pfwgan.trainer import precompute_privacy_reference, train
from pfwgan.utils import atomic_write_text, derive_seed

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

RESOLVED_CONFIG = 'config.resolved.json'
TRAIN_LOG = 'train_log.jsonl'
MODEL_CHECKPOINT = 'model.ckpt'
REPORT_JSON = 'report.json'
REPORT_CSV = 'report.csv'
PLOT_DIR = 'plot'


@dataclass(frozen=True)
class PreparedData:
    train: RawTable
    test: RawTable
    transform: TransformModel
    matrix: DataMatrix
    privacy_ref: Optional[PrivacyReference] = None


def load_real(config: RunConfig, path: Optional[Union[str, Path]] = None) -> Tuple[RawTable, RawTable]:
    """ Ingest the real dataset and split it into (train, test) halves. """
    path = path or config.dataset
    if path is None:
        raise ConfigInvalid(detail='No dataset given, set `dataset` in the config or pass --real', fields=['dataset'])
    schema = TableSchema.from_config(config.table_schema)
    table = load_csv(path, schema, derived=config.table_schema.derived)
    return split(table, SplitSpec(train_fraction=config.split.train_fraction, seed=config.split.seed))


def privacy_reference(config: RunConfig, matrix: DataMatrix) -> PrivacyReference:
    weights = feature_weights(matrix, config.train.loss.feature_weights)
    return precompute_privacy_reference(matrix, weights)


def prepare(
    config: RunConfig,
    real: Optional[Union[str, Path]] = None,
    transform: Optional[TransformModel] = None,
    privacy: bool = True,
) -> PreparedData:
    """
    Load and split the real data, then encode the training half with `transform` or a freshly fitted one.

    The privacy reference is a full nearest-neighbour search over the training split, so it is only
    computed when `privacy` is set.
    """
    train_table, test_table = load_real(config, real)
    if transform is None:
        transform = fit(train_table)
    matrix = encode(train_table, transform)
    return PreparedData(
        train=train_table,
        test=test_table,
        transform=transform,
        matrix=matrix,
        privacy_ref=privacy_reference(config, matrix) if privacy else None,
    )


def write_resolved_config(config: RunConfig, out_dir: Path) -> Path:
    path = out_dir / RESOLVED_CONFIG
    try:
        atomic_write_text(path, config.resolved_json() + '\n')
    except OSError as e:
        raise IOFault(detail=f'Could not write {path}: {e}')
    return path


def _reset_train_log(path: Path, keep_epochs: int) -> None:
    """ Drop records of epochs that a resumed run will produce again. """
    records = read_log(path) if keep_epochs and path.exists() else []
    try:
        path.unlink(missing_ok=True)
    except OSError as e:
        raise IOFault(detail=f'Could not reset training log {path}: {e}')
    for record in records:
        if record.epoch <= keep_epochs:
            append_record(path, record)


def run_train(ctx: Context, resume: Optional[Union[str, Path]] = None) -> Path:
    """
    Ingest, split, fit the transform, precompute the privacy reference and train.

    :return: path of the final checkpoint
    """
    config = ctx.run_config
    out_dir = ctx.output_dir
    write_resolved_config(config, out_dir)

    checkpoint: Optional[Checkpoint] = None
    if resume is not None:
        checkpoint = load_checkpoint(resume)
        if checkpoint.schema != TableSchema.from_config(config.table_schema):
            raise SchemaMismatch(detail=f'Checkpoint {resume} was trained on another schema')
    data = prepare(config, transform=checkpoint.transform if checkpoint is not None else None)
    assert data.privacy_ref is not None  # please mypy

    log_path = out_dir / TRAIN_LOG
    _reset_train_log(log_path, checkpoint.epoch if checkpoint is not None else 0)
    result = train(
        config.train,
        data.matrix,
        data.privacy_ref,
        log_path=log_path,
        checkpoint_dir=ctx.checkpoint_dir,
        resume=checkpoint,
    )
    path = save_checkpoint(result, out_dir / MODEL_CHECKPOINT)
    logger.info(f'Training of {config.model_name} on {config.dataset_name} finished after {result.epoch} epochs')
    return path


def run_generate(
    checkpoint: Union[str, Path], out: Union[str, Path], n: Optional[int] = None, seed: int = 0
) -> Path:
    """ Write n synthetic rows to out. n defaults to the size of the training split. """
    cp = load_checkpoint(checkpoint)
    if n is None:
        n = cp.train_rows
        if n < 1:
            raise ConfigInvalid(detail=f'Checkpoint {checkpoint} does not record its training size, pass --n')
    table = generate(cp, n, seed)
    write_csv(table, out)
    logger.info(f'Wrote {table.n_rows} synthetic rows to {out}')
    return Path(out)


def _synthetic_tables(
    ctx: Context,
    data: PreparedData,
    synth: Optional[Union[str, Path]],
    checkpoint: Optional[Union[str, Path]],
) -> List[RawTable]:
    config = ctx.run_config
    cfg = config.evaluation
    if synth is not None:
        table = load_csv(synth, data.train.schema, derived=config.table_schema.derived)
        return [table]
    if cfg.repetition_mode is RepetitionMode.RETRAIN:
        return _retrained_tables(ctx, data)
    if checkpoint is None:
        raise ConfigInvalid(detail='Nothing to evaluate, pass --synth or --checkpoint')
    cp = load_checkpoint(checkpoint)
    if cp.schema != data.train.schema:
        raise SchemaMismatch(detail=f'Checkpoint {checkpoint} was trained on another schema')
    return [
        generate(cp, data.train.n_rows, derive_seed(cfg.seed, repetition, 1)) for repetition in range(cfg.repetitions)
    ]


def _retrained_tables(ctx: Context, data: PreparedData) -> List[RawTable]:
    """ One freshly trained generator per repetition, training seed offset by the repetition index. """
    config = ctx.run_config
    tables = []
    privacy_ref = data.privacy_ref if data.privacy_ref is not None else privacy_reference(config, data.matrix)
    for repetition in range(config.evaluation.repetitions):
        train_config = config.train.copy(update={'seed': config.train.seed + repetition})
        rep_dir = ctx.output_dir / 'retrain' / f'rep-{repetition:02d}'
        rep_dir.mkdir(parents=True, exist_ok=True)
        log_path = rep_dir / TRAIN_LOG
        _reset_train_log(log_path, 0)
        logger.info(f'Retraining for repetition {repetition} with seed {train_config.seed}')
        cp = train(train_config, data.matrix, privacy_ref, log_path=log_path, checkpoint_dir=rep_dir)
        save_checkpoint(cp, rep_dir / MODEL_CHECKPOINT)
        tables.append(generate(cp, data.train.n_rows, derive_seed(config.evaluation.seed, repetition, 1)))
    return tables


def run_evaluate(
    ctx: Context,
    synth: Optional[Union[str, Path]] = None,
    checkpoint: Optional[Union[str, Path]] = None,
    real: Optional[Union[str, Path]] = None,
    plot: bool = False,
) -> List[Path]:
    """
    Evaluate a synthetic CSV, or samples of a checkpoint, against the real split of the config.

    A synthetic CSV needs no checkpoint, so any external generator's output can be evaluated.

    :return: paths of report.json, report.csv and any plot-data files
    """
    config = ctx.run_config
    out_dir = ctx.output_dir
    write_resolved_config(config, out_dir)

    data = prepare(config, real, privacy=False)
    synths = _synthetic_tables(ctx, data, synth, checkpoint)
    report = evaluate_all(
        data.train, data.test, synths, config.evaluation, dataset=config.dataset_name, model=config.model_name
    )
    paths = [write_report(report, out_dir / REPORT_JSON), write_report_rows(report, out_dir / REPORT_CSV)]
    if plot:
        paths.extend(write_plot_data([report], out_dir / PLOT_DIR))
    logger.info(f'Wrote evaluation report to {paths[0]}')
    return paths


def run_plot_data(reports: Sequence[Union[str, Path]], out_dir: Union[str, Path]) -> List[Path]:
    """ Merge one or more report.json files into utility.csv, fairness.csv and privacy.csv. """
    if not reports:
        raise ConfigInvalid(detail='plot-data needs at least one report')
    loaded = [load_report(path) for path in reports]
    paths = write_plot_data(loaded, out_dir)
    logger.info(f'Wrote plot data for {len(loaded)} reports to {out_dir}')
    return paths
