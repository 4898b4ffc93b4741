"""
Command handlers and the dispatcher behind ``app.py``.

Each handler takes the parsed arguments and a loaded Config_Manager, prints
its report to standard output and returns an exit code.
"""

import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence as SequenceType

import numpy as np

from ..config import Config_Manager, ConfigurationError
from ..detection import (
    PqfAnnotation, detect, detector_metrics, ground_truth_labels, load_annotation,
    load_detector, save_detector, train_detector, write_annotation,
)
from ..enhancement import MfCnn
from ..errors import MfqeError, TrainingError, ValidationFailure
from ..features import extract_features, save_features
from ..formatting import (
    Report_Formatter, plot_cc_curve, plot_delta_bars, plot_loss_trace, plot_motion_magnitude,
    plot_psnr_curves,
)
from ..metrics import (
    PSNR, bd_psnr, bd_rate, cc_curve, fluctuation_stats, load_rd_points, quality_curve,
)
from ..motion import MotionField
from ..pipeline import Sequence_Enhancer, benchmark_fps, enhance_sequence, evaluate
from ..synthetic import write_fixture
from ..training import (
    NON_PQF_TARGET, PQF_TARGET, load_mfcnn, load_trace_csv, save_mfcnn, train_mfcnn,
    write_trace_csv,
)
from ..validation import Input_Validator
from ..video import extract_training_samples, load_metadata, read_yuv420, write_yuv420
from .parser import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, UsageError, build_parser, print_usage_error

logger = logging.getLogger(__name__)

LAST_GOOD_SUFFIX = ".last_good"


def _size(args, config: Config_Manager):
    width = args.width if args.width is not None else config.video_config.width
    height = args.height if args.height is not None else config.video_config.height
    if width is None or height is None:
        raise ConfigurationError("Frame size unknown: pass --w and --h (or set video.width/video.height)")
    return width, height


def _read(path: str, args, config: Config_Manager):
    width, height = _size(args, config)
    return read_yuv420(path, width, height, frame_rate=config.video_config.frame_rate)


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


def _ground_truth(raw, comp) -> PqfAnnotation:
    return PqfAnnotation.from_labels(ground_truth_labels(quality_curve(raw, comp, PSNR)))


def cmd_analyze(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    raw = _read(args.raw, args, config)
    comp = _read(args.comp, args, config)
    curve = quality_curve(raw, comp, args.metric)
    psnr_curve = curve if args.metric == PSNR else quality_curve(raw, comp, PSNR)

    data: Dict[str, object] = {
        'frames': len(comp),
        'resolution': f"{comp.width}x{comp.height}",
        'metric': args.metric,
        'mean_quality': curve.finite_mean(),
    }
    notes: List[str] = []
    labels = None
    if len(comp) >= 3 and psnr_curve.is_finite():
        labels = ground_truth_labels(psnr_curve)
        data['pqfs'] = int(labels.sum())
    if len(comp) >= 3 and curve.is_finite():
        data['fluctuation'] = formatter.fluctuation_dict(fluctuation_stats(curve, labels))
    else:
        notes.append("fluctuation needs at least 3 frames without saturated quality")

    max_lag = min(args.max_lag, len(raw) - 1)
    if max_lag >= 1:
        data['correlation'] = formatter.correlation_dict(cc_curve(raw, max_lag))
    else:
        notes.append("correlation needs at least 2 frames")
    if notes:
        data['notes'] = notes

    _emit(formatter.render(data, args.output_format, title='Quality fluctuation'))
    return EXIT_OK


def cmd_label_pqf(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    raw = _read(args.raw, args, config)
    comp = _read(args.comp, args, config)
    annotation = _ground_truth(raw, comp)
    write_annotation(annotation, args.out)
    _emit(formatter.render({'frames': len(annotation), 'pqfs': len(annotation.pqf_indices),
                            'pqf_indices': annotation.pqf_indices, 'annotation': args.out},
                           args.output_format, title='Ground-truth PQFs'))
    return EXIT_OK


def _features(comp_path: str, meta_path: str, args, config: Config_Manager, workers: Optional[int] = None):
    comp = _read(comp_path, args, config)
    meta = load_metadata(meta_path, expected_count=len(comp))
    return comp, meta, extract_features(comp, meta, workers=workers)


def cmd_extract_features(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    _, _, features = _features(args.comp, args.meta, args, config, workers=args.workers)
    save_features(features, args.out)
    _emit(formatter.render({'frames': features.shape[0], 'dimensions': features.shape[1],
                            'features': args.out}, args.output_format, title='Detector features'))
    return EXIT_OK


def _same_count(**lists: SequenceType) -> None:
    counts = {name: len(values) for name, values in lists.items() if values is not None}
    if len(set(counts.values())) > 1:
        listing = ', '.join(f"--{name.replace('_', '-')} ({count})" for name, count in counts.items())
        raise ConfigurationError(f"Pass the same number of files to {listing}")


def cmd_train_detector(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    _same_count(raw=args.raw, comp=args.comp, meta=args.meta)
    detector_config = config.detector_config
    if args.qp_tag is not None:
        detector_config.qp_tag = args.qp_tag
    if args.epochs is not None:
        detector_config.epochs = args.epochs

    sequences = []
    for raw_path, comp_path, meta_path in zip(args.raw, args.comp, args.meta):
        raw = _read(raw_path, args, config)
        comp, _, features = _features(comp_path, meta_path, args, config)
        Input_Validator().require_aligned(raw, comp)
        sequences.append((features, _ground_truth(raw, comp).labels))

    seed = config.train_config.seed
    detector = train_detector(sequences, detector_config, seed=seed)
    save_detector(detector, args.out, seed=seed)
    _emit(formatter.render({'clips': len(sequences), 'epochs': detector_config.epochs,
                            'qp_tag': detector_config.qp_tag, 'checkpoint': args.out},
                           args.output_format, title='Detector training'))
    return EXIT_OK


def cmd_detect(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    detector = load_detector(args.detector)
    if args.no_postprocess:
        detector.config.postprocess = False
    comp, meta, _ = _features(args.comp, args.meta, args, config)
    annotation = detect(comp, meta, detector)
    write_annotation(annotation, args.out)

    data = {'frames': len(annotation), 'pqfs': len(annotation.pqf_indices),
            'pqf_indices': annotation.pqf_indices, 'annotation': args.out}
    if args.raw:
        raw = _read(args.raw, args, config)
        data['detector'] = formatter.detector_dict(detector_metrics(annotation, _ground_truth(raw, comp)))
    _emit(formatter.render(data, args.output_format, title='PQF detection'))
    return EXIT_OK


def cmd_train_mfcnn(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    _same_count(raw=args.raw, comp=args.comp, annotation=args.annotation)
    targets = [t for t, out in ((NON_PQF_TARGET, args.out_np), (PQF_TARGET, args.out_pqf)) if out]
    if not targets:
        raise ConfigurationError("Nothing to train: pass --out-np and/or --out-pqf")

    train_config = config.train_config
    rng = np.random.default_rng(train_config.seed)
    samples = []
    for index, (raw_path, comp_path) in enumerate(zip(args.raw, args.comp)):
        raw = _read(raw_path, args, config)
        comp = _read(comp_path, args, config)
        labels = load_annotation(args.annotation[index]) if args.annotation else _ground_truth(raw, comp)
        samples.extend(extract_training_samples(
            raw, comp, labels, patch=train_config.patch, stride=config.video_config.stride,
            augment=config.video_config.augment, rng=rng,
        ))

    data = {'samples': len(samples), 'models': {}}
    outputs = {NON_PQF_TARGET: args.out_np, PQF_TARGET: args.out_pqf}
    for target in targets:
        path = outputs[target]
        try:
            result = train_mfcnn(samples, train_config, config.mc_config, config.qe_config,
                                 targets=(target,), device=config.pipeline_config.device)[target]
        except TrainingError as e:
            if e.checkpoint is not None:
                fallback = f"{path}{LAST_GOOD_SUFFIX}"
                save_mfcnn(e.checkpoint, fallback)
                logger.warning("Saved the last good %s checkpoint to %s", target, fallback)
                sys.stderr.write(f"last good checkpoint: {fallback}\n")
            raise

        save_mfcnn(result, path)
        entry = {'checkpoint': path, 'steps': len(result.trace),
                 'stage_switch_step': result.stage_switch_step}
        if result.trace:
            entry['initial_l_qe'] = result.trace[0].l_qe
            entry['final_l_qe'] = result.trace[-1].l_qe
        if args.trace_prefix:
            entry['trace'] = f"{args.trace_prefix}_{target}.csv"
            write_trace_csv(result.trace, entry['trace'])
        data['models'][target] = entry

    _emit(formatter.render(data, args.output_format, title='MF-CNN training'))
    return EXIT_OK


def cmd_enhance(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    comp = _read(args.comp, args, config)
    pipeline_config = config.pipeline_config

    annotation = load_annotation(args.annotation) if args.annotation else None
    meta = load_metadata(args.meta, expected_count=len(comp)) if args.meta else None
    raw = _read(args.raw, args, config) if args.raw else None
    if annotation is None and pipeline_config.label_source == 'detector' and not (args.detector and meta):
        raise ConfigurationError("Detection needs --detector and --meta (or pass --annotation)")

    enhanced, annotation = enhance_sequence(comp, meta, args.detector, args.mfcnn_np, args.mfcnn_pqf,
                                            config=pipeline_config, annotation=annotation, raw=raw)
    write_yuv420(enhanced, args.out)
    if args.annotation_out:
        write_annotation(annotation, args.annotation_out)

    _emit(formatter.render({'frames': len(enhanced), 'pqfs': len(annotation.pqf_indices),
                            'reference_mode': pipeline_config.reference_mode, 'output': args.out},
                           args.output_format, title='Enhancement'))
    return EXIT_OK


def cmd_evaluate(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    raw = _read(args.raw, args, config)
    comp = _read(args.comp, args, config)
    enhanced = _read(args.enhanced, args, config)
    annotation = load_annotation(args.annotation) if args.annotation else _ground_truth(raw, comp)
    gt = load_annotation(args.gt_annotation) if args.gt_annotation else None

    report = evaluate(raw, comp, enhanced, annotation, gt_labels=gt)
    _emit(formatter.render(formatter.report_dict(report), args.output_format, title='Enhancement report'))
    return EXIT_OK


def cmd_bdrate(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    anchor = load_rd_points(args.anchor)
    test = load_rd_points(args.test)
    rate = bd_rate(anchor, test)
    delta_psnr = bd_psnr(anchor, test)
    if args.output_format == 'yaml':
        _emit(formatter.to_yaml(formatter.bd_dict(rate, delta_psnr)))
    else:
        _emit(f"BD-rate: {rate:.2f}%\nBD-PSNR: {delta_psnr:.4f} dB\n")
    return EXIT_OK


def _model(path: Optional[str], config: Config_Manager) -> MfCnn:
    if path:
        return load_mfcnn(path)[0]
    return MfCnn(config.mc_config, config.qe_config)


def cmd_benchmark(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    enhancer = Sequence_Enhancer(_model(args.mfcnn_np, config), _model(args.mfcnn_pqf, config),
                                 config=config.pipeline_config)
    results = [benchmark_fps(enhancer, res, repeats=args.repeats, warmup=args.warmup,
                             frames=args.frames, seed=config.train_config.seed)
               for res in args.resolution]
    _emit(formatter.render(formatter.benchmark_dict(results), args.output_format, title='Benchmark'))
    return EXIT_OK


def cmd_plot(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    if not (args.comp and args.raw) and not args.trace and not args.mv:
        raise ConfigurationError("Nothing to plot: pass --raw with --comp, --trace or --mv")
    written = []
    os.makedirs(args.out_dir, exist_ok=True)

    if args.raw and args.comp:
        raw = _read(args.raw, args, config)
        comp = _read(args.comp, args, config)
        annotation = load_annotation(args.annotation) if args.annotation else None
        max_lag = min(args.max_lag, len(raw) - 1)
        if max_lag >= 1:
            written.append(plot_cc_curve(cc_curve(raw, max_lag), os.path.join(args.out_dir, 'cc_lag.png')))
        if args.enhanced:
            enhanced = _read(args.enhanced, args, config)
            labels = annotation if annotation is not None else _ground_truth(raw, comp)
            report = evaluate(raw, comp, enhanced, labels)
            written.append(plot_psnr_curves(report.psnr_before, report.psnr_after,
                                            os.path.join(args.out_dir, 'psnr_curve.png'), labels=labels))
            written.append(plot_delta_bars(report, os.path.join(args.out_dir, 'delta_bars.png')))
        else:
            before = quality_curve(raw, comp, PSNR).values
            written.append(plot_psnr_curves(before, before, os.path.join(args.out_dir, 'psnr_curve.png'),
                                            labels=annotation))

    for path in args.trace or []:
        name = os.path.splitext(os.path.basename(path))[0]
        written.append(plot_loss_trace(load_trace_csv(path), os.path.join(args.out_dir, f"{name}.png")))

    if args.mv:
        width, height = _size(args, config)
        written.append(plot_motion_magnitude(MotionField.load(args.mv, width, height),
                                             os.path.join(args.out_dir, 'motion_magnitude.png')))

    _emit(formatter.render({'figures': written}, args.output_format, title='Plots'))
    return EXIT_OK


def cmd_make_fixture(args, config: Config_Manager, formatter: Report_Formatter) -> int:
    width = args.width or config.video_config.width or 64
    height = args.height or config.video_config.height or 64
    paths = write_fixture(args.out_dir, frames=args.frames, width=width, height=height,
                          seed=config.train_config.seed)
    _emit(formatter.render(paths, args.output_format, title='Fixture'))
    return EXIT_OK


COMMAND_HANDLERS: Dict[str, Callable] = {
    'analyze': cmd_analyze,
    'label-pqf': cmd_label_pqf,
    'extract-features': cmd_extract_features,
    'train-detector': cmd_train_detector,
    'detect': cmd_detect,
    'train-mfcnn': cmd_train_mfcnn,
    'enhance': cmd_enhance,
    'evaluate': cmd_evaluate,
    'bdrate': cmd_bdrate,
    'benchmark': cmd_benchmark,
    'plot': cmd_plot,
    'make-fixture': cmd_make_fixture,
}


def _overrides(args) -> Dict[str, Dict[str, object]]:
    overrides: Dict[str, Dict[str, object]] = {
        'training': {'seed': args.seed},
        'pipeline': {'device': args.device},
        'logging': {'level': args.log_level or os.environ.get('MFQE_LOG_LEVEL')},
    }
    if args.command == 'train-mfcnn':
        overrides['training'].update({
            'stage1_max_steps': args.stage1_max_steps, 'stage2_steps': args.stage2_steps,
            'batch_size': args.batch_size, 'patch': args.patch,
        })
    if args.command == 'enhance':
        overrides['pipeline'].update({'reference_mode': args.reference_mode,
                                      'label_source': args.label_source})
    return overrides


def load_run_config(args) -> Config_Manager:
    """Load the YAML config named by --config or $MFQE_CONFIG and apply flag overrides."""
    manager = Config_Manager(args.config or os.environ.get('MFQE_CONFIG') or None)
    manager.load_config()
    manager.apply_overrides(_overrides(args))
    logging.getLogger().setLevel(manager.logging_config.level)
    logger.info("Resolved configuration: %s", manager.to_dict())
    return manager


def cli_dispatch(argv: Optional[SequenceType[str]] = None) -> int:
    """
    Parse ``argv``, run one subcommand and map failures to exit codes.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        0 on success, 1 on invalid input or usage, 2 on runtime failure
    """
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as e:
        print_usage_error(e)
        return EXIT_VALIDATION
    except SystemExit as e:
        # --help exits through argparse
        return EXIT_OK if e.code in (None, 0) else EXIT_VALIDATION

    try:
        config = load_run_config(args)
        return COMMAND_HANDLERS[args.command](args, config, Report_Formatter())
    except ValidationFailure as e:
        logger.error("%s failed: %s", args.command, e)
        sys.stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION
    except MfqeError as e:
        logger.error("%s failed: %s", args.command, e)
        sys.stderr.write(f"error: {e}\n")
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception("Unexpected failure in %s", args.command)
        sys.stderr.write(f"error: unexpected failure in {args.command}: {e}\n")
        return EXIT_RUNTIME
