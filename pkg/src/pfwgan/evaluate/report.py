# -*- coding: utf-8 -*-
"""
Repetition statistics over the three evaluation axes, plus their JSON and CSV forms.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd
from marshmallow import ValidationError

from pfwgan.config import EvalConfig
from pfwgan.data.table import RawTable
from pfwgan.data.transform import UnseenPolicy, encode, feature_weights, fit
from pfwgan.evaluate.fairness import demographic_parity
from pfwgan.evaluate.privacy import identifiability
from pfwgan.evaluate.utility import tstr
from pfwgan.exceptions import DataInvalid, IOFault, SchemaMismatch
from pfwgan.schemas.report import METRICS, EvalReport, EvalReportSchema, MetricSummary, ModelReport
from pfwgan.utils import atomic_write_text, derive_seed

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

REAL_BASELINE = 'real'

# figure name -> metric plotted in it
PLOT_METRICS = {'utility': 'auc_roc', 'fairness': 'dp_gap', 'privacy': 'identifiability'}


def _summaries(values: Dict[str, List[float]]) -> Dict[str, Optional[MetricSummary]]:
    return {name: MetricSummary.from_values(values.get(name, [])) for name in METRICS}


def _evaluate_model(
    model: str,
    real_train: RawTable,
    real_test: RawTable,
    synths: Sequence[RawTable],
    cfg: EvalConfig,
    privacy: bool,
) -> ModelReport:
    values: Dict[str, List[float]] = {name: [] for name in METRICS}
    seeds: List[int] = []
    warnings: List[str] = []
    errors: Dict[str, str] = {}

    real_model = fit(real_train)
    real_matrix = encode(real_train, real_model)
    weights = feature_weights(real_matrix, cfg.feature_weights)

    for repetition in range(cfg.repetitions):
        seed = derive_seed(cfg.seed, repetition)
        seeds.append(seed)
        synth = synths[repetition % len(synths)]
        try:
            scores = tstr(synth, real_test, cfg, seed=seed)
            values['accuracy'].append(scores.accuracy)
            values['f1'].append(scores.f1)
            values['auc_roc'].append(scores.auc_roc)
        except DataInvalid as e:
            logger.warning(f'{model}: utility skipped in repetition {repetition}: {e.detail}')
            errors['utility'] = e.detail or type(e).__name__

        parity = demographic_parity(synth)
        values['dp_gap'].append(parity.gap)
        warnings.extend(w for w in parity.warnings if w not in warnings)

        if privacy:
            synth_matrix = encode(synth, real_model, unseen=UnseenPolicy.IGNORE)
            score = identifiability(real_matrix, synth_matrix, weights, cap=cfg.identifiability_cap, seed=seed)
            values['identifiability'].append(score)

    summaries = _summaries(values)
    identifiable = summaries['identifiability']
    if identifiable is not None and identifiable.mean >= 1.0:
        warnings.append('identifiability is 1.0, every real training row has a synthetic copy')
        logger.warning(f'{model}: maximal privacy risk, every real training row is matched by a synthetic row')
    return ModelReport(model=model, seeds=seeds, warnings=warnings, errors=errors, **summaries)


def evaluate_all(
    real_train: RawTable,
    real_test: RawTable,
    synth: Union[RawTable, Sequence[RawTable]],
    cfg: Optional[EvalConfig] = None,
    dataset: str = 'dataset',
    model: str = 'pfwgan',
) -> EvalReport:
    """
    Evaluate synthetic data against the real split, and the real training split itself as the baseline row.

    `synth` is one table, reused by every repetition, or one table per repetition.
    """
    cfg = cfg or EvalConfig()
    synths = [synth] if isinstance(synth, RawTable) else list(synth)
    if not synths:
        raise DataInvalid(detail='No synthetic table to evaluate')
    for table in [real_test, *synths]:
        if table.schema != real_train.schema:
            raise SchemaMismatch(detail='All evaluated tables must share the schema of the real training table')

    rows = [
        _evaluate_model(model, real_train, real_test, synths, cfg, privacy=True),
        _evaluate_model(REAL_BASELINE, real_train, real_test, [real_train], cfg, privacy=False),
    ]
    report = EvalReport(
        dataset=dataset, rows=rows, repetitions=cfg.repetitions, repetition_mode=cfg.repetition_mode.value
    )
    logger.info(f'Evaluated {model} on {dataset} over {cfg.repetitions} repetitions')
    return report


def report_to_json(report: EvalReport) -> str:
    return json.dumps(EvalReportSchema().dump(report), indent=2, sort_keys=True)


def report_from_json(text: str) -> EvalReport:
    try:
        return EvalReportSchema().load(json.loads(text))
    except (ValueError, ValidationError) as e:
        raise DataInvalid(detail=f'Not an evaluation report: {e}')


def write_report(report: EvalReport, path: Union[str, Path]) -> Path:
    try:
        atomic_write_text(path, report_to_json(report) + '\n')
    except OSError as e:
        raise IOFault(detail=f'Could not write report {path}: {e}')
    return Path(path)


def load_report(path: Union[str, Path]) -> EvalReport:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise IOFault(detail=f'Could not read report {path}: {e}')
    return report_from_json(text)


def report_rows(report: EvalReport) -> pd.DataFrame:
    """ One flat row per (dataset, model) with mean and std columns of every metric. """
    records = []
    for row in report.rows:
        record: Dict[str, object] = {'dataset': report.dataset, 'model': row.model}
        for name in METRICS:
            summary = row.metric(name)
            record[f'{name}_mean'] = summary.mean if summary else None
            record[f'{name}_std'] = summary.std if summary else None
        records.append(record)
    return pd.DataFrame.from_records(records)


def write_report_rows(report: EvalReport, path: Union[str, Path]) -> Path:
    try:
        report_rows(report).to_csv(path, index=False)
    except OSError as e:
        raise IOFault(detail=f'Could not write {path}: {e}')
    return Path(path)


def plot_data(reports: Sequence[EvalReport]) -> Dict[str, pd.DataFrame]:
    """ One frame per figure with columns dataset, model, mean, std. """
    frames: Dict[str, pd.DataFrame] = {}
    for figure, metric in PLOT_METRICS.items():
        records = []
        for report in reports:
            for row in report.rows:
                summary = row.metric(metric)
                if summary is None:
                    continue
                records.append(
                    {'dataset': report.dataset, 'model': row.model, 'mean': summary.mean, 'std': summary.std}
                )
        frames[figure] = pd.DataFrame.from_records(records, columns=['dataset', 'model', 'mean', 'std'])
    return frames


def write_plot_data(reports: Sequence[EvalReport], out_dir: Union[str, Path]) -> List[Path]:
    out = Path(out_dir)
    paths = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for figure, frame in plot_data(reports).items():
            path = out / f'{figure}.csv'
            frame.to_csv(path, index=False)
            paths.append(path)
    except OSError as e:
        raise IOFault(detail=f'Could not write plot data to {out}: {e}')
    return paths
