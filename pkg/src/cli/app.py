"""
Level set laboratory command line
Runs scenarios end to end (arrival time, singular points, Lojasiewicz analysis,
flowlines) and checks them against their acceptance flags
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numba
import numpy as np
import pandas as pd

from analysis.flowlines import Termination, cone_consistency_check, trace_flowline, verify_arc_bounds
from analysis.lojasiewicz import LojasiewiczReport, Verdict, calibrated_u_floor, lojasiewicz_analyze, saddle_type_one
from analysis.singular import (Classification, SingularityAnalyzer, SingularityReport, SingularPointRecord,
                               clearing_out_check, cylindrical_scale, hessian_continuity_modulus,
                               slice_max_profile)
from cli.scenario_config import ScenarioConfig, list_scenarios, resolve_config, validate_config
from core.config import ACCEPTANCE_CONFIG
from core.env_config import env_config
from core.evolve import ArrivalField, compute_arrival_time, interior_local_minima
from core.exceptions import ConfigError, LevelRangeError, LevelSetError, NearSingularError
from core.field import ScalarField, sample_cylinder_arrival, sample_sphere_arrival
from core.gaussian import EntropySearchCfg, entropy, huisken_profile, is_nonincreasing
from core.report_generator import RunReportWriter
from core.results_manager import RunLedger
from core.shapes import CylinderSlab, Sphere
from core.surface import extract_level_set
from core.utils import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FLAGGED = 2


@dataclass
class RunReport:
    """Outcome of one scenario run; every flag names the criterion it checks"""
    scenario: str
    config_path: str
    output_dir: str
    extinction_time: float = float('nan')
    records: List[SingularPointRecord] = field(default_factory=list)
    lojasiewicz: Dict[int, LojasiewiczReport] = field(default_factory=dict)
    entropy: Optional[pd.DataFrame] = None
    flags: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    singular: Optional[SingularityReport] = None
    cylindrical_scales: Dict[int, float] = field(default_factory=dict)
    run_id: Optional[str] = None
    artifacts: List[str] = field(default_factory=list)

    def flag(self, name: str, passed: bool, **detail):
        self.flags[name] = {'passed': bool(passed), 'detail': detail}
        if not passed:
            logger.warning(f"Acceptance flag {name} failed: {detail}")

    @property
    def passed(self) -> bool:
        return all(entry['passed'] for entry in self.flags.values())

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_FLAGGED

    def summary(self) -> Dict[str, Any]:
        clusters = []
        if self.singular is not None:
            for index, (cluster, model) in enumerate(zip(self.singular.clusters, self.singular.models)):
                top = max(cluster, key=lambda r: r.value)
                loj = self.lojasiewicz.get(index)
                clusters.append({
                    'cluster': index,
                    'size': len(cluster),
                    'label': top.label,
                    'location': top.location,
                    'value': top.value,
                    'verdict': loj.label if loj else None,
                    'model': model.kind,
                    'model_rms': model.rms,
                    'circle_rms': model.circle.rms if model.circle else None,
                    'mean_angle_deg': float(np.degrees(model.mean_angle)) if len(model.angles) else None,
                    'cylindrical_scale': self.cylindrical_scales.get(index),
                })
        return {
            'scenario': self.scenario,
            'config': self.config_path,
            'run_id': self.run_id,
            'extinction_time': self.extinction_time,
            'labels': self.singular.label_counts() if self.singular else {},
            'clusters': clusters,
            'entropy': (self.entropy.groupby('level')['F'].max().to_dict()
                        if self.entropy is not None and not self.entropy.empty else {}),
            'flags': self.flags,
            'passed': self.passed,
        }


class ScenarioRunner:
    """Executes the stages of one scenario according to its toggles"""

    def __init__(self, config: ScenarioConfig, output_dir: Optional[str] = None, threads: int = 0):
        self.config = config
        self.output_dir = output_dir or env_config.output_dir or config.output_dir
        self.threads = threads
        self.logger = logging.getLogger(__name__)
        self.writer = RunReportWriter(self.output_dir, plots=bool(config.get('output.plots')))
        self.report = RunReport(config.name, config.source, self.output_dir)
        self.expected = config.get('expect.classification')
        self.arrival: Optional[ArrivalField] = None
        self.shape = None
        self.h = float('nan')
        self.u_floor: Optional[float] = None

    def run(self) -> RunReport:
        cfg = self.config
        cfg.validate()
        grid = cfg.build_grid()
        self.shape = cfg.build_shape()
        evolve = cfg.build_evolve()
        self.h = grid.spacing

        callback = self._snapshot if cfg.get('output.vtk') and evolve.emit_every else None
        self.arrival = compute_arrival_time(self.shape, grid, evolve, callback)
        self.report.extinction_time = self.arrival.extinction_time
        if cfg.get('output.vtk'):
            self.writer.write_field(self.arrival.u, title=f'{cfg.name} arrival time')
        self._check_arrival(evolve.coverage_threshold)

        self.u_floor = cfg.get('analysis.u_floor')
        if self.u_floor is None:
            self.u_floor = calibrated_u_floor(self.arrival.u)
        if cfg.toggle('classification'):
            self._analyze_singular()
        if cfg.toggle('entropy'):
            self._entropy()

        self.writer.write_summary({**self.report.summary(), 'evolution': self.arrival.metadata(),
                                   'u_floor': self.u_floor, 'warnings': self.arrival.warnings})
        self.report.artifacts = list(self.writer.written)
        return self.report

    def _snapshot(self, step: int, t: float, phi: ScalarField):
        self.writer.write_snapshot(phi, step, t)

    # Arrival time
    def _check_arrival(self, coverage_threshold: float):
        arrival = self.arrival
        self.report.flag('sweep_coverage', arrival.coverage >= coverage_threshold,
                         coverage=arrival.coverage, warnings=arrival.warnings)
        inside = int(np.count_nonzero(arrival.initial.values < 0.0))
        allowed = ACCEPTANCE_CONFIG['monotone_violation_rate'] * inside
        self.report.flag('monotone_advance', arrival.monotone_violations <= allowed,
                         violations=arrival.monotone_violations, allowed=allowed)
        minima = interior_local_minima(arrival)
        self.report.flag('no_interior_minimum', not minima, count=len(minima), first=minima[:5])
        reference = self.config.get('expect.reference')
        if reference != 'none':
            self._check_reference(reference)

    def _check_reference(self, reference: str):
        """L-infinity distance to the exact sphere or cylinder arrival time"""
        grid = self.arrival.grid
        shape = self.shape
        if reference == 'sphere':
            if not isinstance(shape, Sphere):
                raise ConfigError("expect.reference = sphere needs shape.kind = sphere")
            exact = sample_sphere_arrival(grid, shape.radius, shape.center)
        else:
            if not isinstance(shape, CylinderSlab) or shape.half_length is not None:
                raise ConfigError("expect.reference = cylinder needs an infinite shape.kind = cylinder")
            exact = sample_cylinder_arrival(grid, shape.radius, shape.axis, shape.center)

        offsets = grid.coordinates().reshape(-1, grid.dim) - np.asarray(shape.center, dtype=float)
        if reference == 'cylinder':
            offsets[:, shape.axis] = 0.0
        radius = self.config.get('expect.linf_radius')
        mask = np.linalg.norm(offsets, axis=1) <= radius if radius > 0 else self.arrival.reached.ravel()
        error = float(np.max(np.abs(self.arrival.u.values.ravel()[mask] - exact.values.ravel()[mask])))
        tolerance = self.config.get('expect.linf_tolerance')
        self.logger.info(f"L-infinity error against the exact {reference}: {error:.3e}")
        self.report.flag('reference_linf', error <= tolerance, error=error, tolerance=tolerance,
                         radius=radius, nodes=int(np.count_nonzero(mask)))

    # Singular points
    def _chosen(self, singular: SingularityReport) -> List[SingularPointRecord]:
        """Per cluster, the highest record with the expected label, else the highest record"""
        chosen = []
        for cluster in singular.clusters:
            matching = [r for r in cluster if r.label == self.expected]
            chosen.append(max(matching or cluster, key=lambda r: r.value))
        return chosen

    def _analyze_singular(self):
        cfg = self.config
        analyzer = SingularityAnalyzer(cfg.build_analysis(self.threads, self.u_floor))
        singular = analyzer.run(self.arrival)
        self.report.singular = singular
        self.report.records = singular.records
        self.writer.write_records(singular.records)

        chosen = self._chosen(singular)
        targets = [r for r in chosen if r.label == self.expected]
        self._check_classification(singular, targets)
        self._check_models(singular, chosen)
        self._slices(chosen)
        if cfg.toggle('lojasiewicz'):
            self._lojasiewicz(chosen)
        if cfg.toggle('clearing_out'):
            self._clearing_out(chosen)
        if cfg.toggle('hessian_modulus'):
            self._hessian_modulus(chosen, targets)
        if cfg.toggle('cylindrical_scale'):
            self._cylindrical_scales(chosen)
        if cfg.toggle('flowlines') and cfg.toggle('lojasiewicz'):
            self._flowlines(chosen)

    def _check_classification(self, singular: SingularityReport, targets: List[SingularPointRecord]):
        if self.expected == 'none':
            return
        self.report.flag('expected_classification', bool(targets), expected=self.expected,
                         clusters=len(singular.clusters), labels=singular.label_counts())
        if self.expected != Classification.ROUND.value:
            return
        tol = ACCEPTANCE_CONFIG['round_hessian_tol']
        center = np.asarray(self.shape.center, dtype=float) if isinstance(self.shape, Sphere) else None
        errors, distances = [], []
        for record in targets:
            n = record.dim
            errors.append(float(np.max(np.abs(record.hessian + np.eye(n) / (n - 1)))))
            if center is not None:
                distances.append(float(np.linalg.norm(record.location - center)))
        close = all(d <= ACCEPTANCE_CONFIG['round_center_cells'] * self.h for d in distances)
        self.report.flag('round_point_hessian', bool(targets) and max(errors, default=np.inf) <= tol and close,
                         hessian_error=errors, center_distance=distances, tolerance=tol)

    def _check_models(self, singular: SingularityReport, chosen: List[SingularPointRecord]):
        """Curves of cylindrical points: fit residual and axis/tangent agreement"""
        rms_limit = ACCEPTANCE_CONFIG['fit_rms_cells'] * self.h
        angle_limit = ACCEPTANCE_CONFIG['fit_angle_deg']
        rows = []
        for index, (model, record) in enumerate(zip(singular.models, chosen)):
            if model.kind != 'curve' or record.classification is not Classification.CYLINDRICAL:
                continue
            rms = model.circle.rms if model.circle else model.rms
            angle = float(np.degrees(model.mean_angle))
            rows.append({'cluster': index, 'points': len(model.points), 'rms': rms,
                         'mean_angle_deg': angle, 'closed': model.circle is not None,
                         'ok': rms <= rms_limit and angle <= angle_limit})
        if not rows:
            return
        self.writer.export_to_csv(rows, self.writer.path('singular_set_fit.csv'))
        self.report.flag('singular_set_fit', all(row['ok'] for row in rows), fits=rows,
                         rms_limit=rms_limit, angle_limit_deg=angle_limit)

    def _slices(self, chosen: List[SingularPointRecord]):
        frames = {}
        for index, record in enumerate(chosen):
            axis = record.axis_vector()
            if axis is None or record.classification not in (Classification.SADDLE, Classification.CYLINDRICAL):
                continue
            frames[str(index)] = slice_max_profile(self.arrival, record.location, axis).to_frame()
        if frames:
            self.writer.write_tagged_tables(frames, 'slices.csv')
            self.writer.plot_profile(pd.concat([f.assign(cluster=k) for k, f in frames.items()]),
                                     'z', 'u_max', 'slices.html', 'Slice maxima along the axis', color='cluster')

    def _lojasiewicz(self, chosen: List[SingularPointRecord]):
        loj_cfg = self.config.build_lojasiewicz(self.u_floor)
        frames, contradictions = {}, []
        for index, record in enumerate(chosen):
            result = lojasiewicz_analyze(self.arrival, record.location, loj_cfg, center_value=record.value)
            self.report.lojasiewicz[index] = result
            frames[str(index)] = result.to_frame()
            if saddle_type_one(record, result):
                contradictions.append(index)
        if frames:
            self.writer.write_tagged_tables(frames, 'lojasiewicz.csv')
            self.writer.plot_profile(pd.concat([f.assign(cluster=k) for k, f in frames.items()]),
                                     'r', 's', 'lojasiewicz.html', 'Lojasiewicz suprema', color='cluster',
                                     log_axes=True)
        self.report.flag('no_saddle_type_one', not contradictions, clusters=contradictions)

        expected = self.config.get('expect.verdict')
        if expected == 'none':
            return
        checked = [i for i, r in enumerate(chosen) if self.expected == 'none' or r.label == self.expected]
        reports = self.report.lojasiewicz
        passed = bool(checked) and all(reports[i].verdict is Verdict(expected) for i in checked)
        self.report.flag('expected_verdict', passed, expected=expected,
                         verdicts={i: reports[i].label for i in checked})

    def _clearing_out(self, chosen: List[SingularPointRecord]):
        offsets = self.config.clearing_offsets(self.h)
        M = self.config.get('analysis.clearing_M')
        rows, passed = [], True
        for index, record in enumerate(chosen):
            if not record.is_saddle:
                continue
            results = clearing_out_check(self.arrival, record.location, M, offsets, record.value)
            for result in results:
                rows.append({'cluster': index, 't': result.offset, 'level': result.level, 'radius': result.radius,
                             'evaluable': result.evaluable, 'cleared': result.cleared, 'margin': result.margin})
            passed &= bool(results) and all(r.evaluable and r.cleared for r in results)
        if not rows:
            return
        self.writer.export_to_csv(rows, self.writer.path('clearing_out.csv'))
        self.report.flag('clearing_out', passed, M=M, offsets=list(offsets),
                         margins=[row['margin'] for row in rows])

    def _hessian_modulus(self, chosen: List[SingularPointRecord], targets: List[SingularPointRecord]):
        radius = ACCEPTANCE_CONFIG['modulus_radius_cells'] * self.h
        limit = ACCEPTANCE_CONFIG['modulus_tol']
        frames, checked = {}, {}
        for index, record in enumerate(chosen):
            if record.is_saddle:
                continue
            profile = hessian_continuity_modulus(self.arrival, record.location, hessian_p=record.hessian,
                                                 stencil=self.config.get('analysis.hessian_stencil'))
            frames[str(index)] = profile.to_frame()
            if any(record is t for t in targets):
                checked[index] = profile.at(radius)
        if frames:
            self.writer.write_tagged_tables(frames, 'hessian_modulus.csv')
            self.writer.plot_profile(pd.concat([f.assign(cluster=k) for k, f in frames.items()]),
                                     'r', 'modulus', 'hessian_modulus.html', 'Hessian continuity modulus',
                                     color='cluster')
        if checked:
            self.report.flag('hessian_continuity', all(v <= limit for v in checked.values()),
                             radius=radius, modulus=checked, limit=limit)

    def _cylindrical_scales(self, chosen: List[SingularPointRecord]):
        analysis = self.config.build_analysis()
        for index, record in enumerate(chosen):
            if record.classification is not Classification.CYLINDRICAL:
                continue
            try:
                scale = cylindrical_scale(self.arrival, record.location, record.axis, analysis.phi,
                                          analysis.eps, value=record.value)
            except LevelSetError as e:
                self.logger.warning(f"Cylindrical scale of cluster {index} unavailable: {e}")
                continue
            self.report.cylindrical_scales[index] = scale
            self.logger.info(f"Cluster {index}: cylindrical scale {scale:.4g}")

    # Flowlines
    def _flowline_starts(self, record: SingularPointRecord) -> np.ndarray:
        """Points 12h from p along the directions transverse to the axis"""
        n = record.dim
        transverse = record.eigenvectors[:, :n - record.nullity].T
        distance = ACCEPTANCE_CONFIG['flowline_start_cells'] * self.h
        starts = np.vstack([record.location + sign * distance * transverse for sign in (1.0, -1.0)])
        return starts[self.arrival.u.contains(starts, 2.0 * self.h)]

    def _flowlines(self, chosen: List[SingularPointRecord]):
        analysis = self.config.build_analysis()
        lines, arc_rows, cone_rows = [], [], []
        cones: Dict[int, bool] = {}
        reach = ACCEPTANCE_CONFIG['flowline_end_cells'] * self.h
        for index, record in enumerate(chosen):
            loj = self.report.lojasiewicz.get(index)
            if loj is None or loj.verdict is not Verdict.TYPE_I:
                continue
            for start in self._flowline_starts(record):
                try:
                    line = trace_flowline(self.arrival, start)
                except NearSingularError:
                    continue
                lines.append(line)
                if np.linalg.norm(line.end - record.location) > reach:
                    continue
                bound = verify_arc_bounds(line, loj.beta, record.location, record.value)
                if bound.applicable:
                    arc_rows.append({'cluster': index, 'start': np.round(start, 6).tolist(),
                                     'arc_length': bound.arc_length, 'bound': bound.bound,
                                     'arc_slack': bound.arc_slack, 'pointwise_slack': bound.pointwise_slack,
                                     'ok': bound.ok})
            if record.classification is Classification.CYLINDRICAL and record.dim >= 3:
                cone = cone_consistency_check(self.arrival, record.location, record.axis_vector(), loj.beta,
                                              record.value, phi=analysis.phi, threads=self.threads)
                cone_rows.extend({'cluster': index, 'z': c.z_check, 't': c.t_check, 'lower': c.lower,
                                  'upper': c.upper, 'arc_to_center': c.arc_to_center,
                                  'reaches_center': c.reaches_center, 'contradiction': c.contradiction}
                                 for c in cone.launches)
                cones[index] = cone.consistent

        if lines:
            self.writer.write_flowlines(lines)
            frames = {str(i): line.to_frame().assign(termination=line.termination.value)
                      for i, line in enumerate(lines)}
            self.writer.write_tagged_tables(frames, 'flowlines.csv', tag='line')
            reached = sum(line.termination is Termination.REACHED_CRITICAL for line in lines)
            self.logger.info(f"Traced {len(lines)} flowlines, {reached} reached a critical point")
        if arc_rows:
            self.writer.export_to_csv(arc_rows, self.writer.path('arc_bounds.csv'))
            self.report.flag('arc_length_bound', all(row['ok'] for row in arc_rows), checked=len(arc_rows))
        if cone_rows:
            self.writer.export_to_csv(cone_rows, self.writer.path('cone_consistency.csv'))
        if cones:
            self.report.flag('cone_consistency', all(cones.values()), clusters=cones, launches=len(cone_rows))

    # Gaussian areas
    def _entropy(self):
        """Entropy of level sets at fixed fractions of the extinction time, and Huisken monotonicity"""
        extinction = self.report.extinction_time
        search = EntropySearchCfg(spacing=self.h)
        frames = []
        for fraction in ACCEPTANCE_CONFIG['entropy_levels']:
            level = fraction * extinction
            try:
                surface = extract_level_set(self.arrival, level)
            except LevelRangeError as e:
                self.logger.warning(f"No level set for the entropy at t={level:.4g}: {e}")
                continue
            if self.config.get('output.vtk'):
                self.writer.write_level_surface(surface, f'level_{fraction:.2f}.vtk')
            result = entropy(surface, search)
            self.logger.info(f"Entropy at t={level:.4g}: {result.value:.5f}")
            frames.append(result.to_frame().assign(level=level))
        if frames:
            self.report.entropy = pd.concat(frames, ignore_index=True)
            self.writer.write_table(self.report.entropy, 'entropy.csv')

        if self.report.singular is None or self.expected != Classification.ROUND.value:
            return
        rows, monotone = [], True
        for index, record in enumerate(self._chosen(self.report.singular)):
            if record.classification is not Classification.ROUND:
                continue
            start = ACCEPTANCE_CONFIG['entropy_levels'][0] * record.value
            scale = record.value - start
            offsets = np.linspace(0.0, 0.8 * scale, ACCEPTANCE_CONFIG['huisken_offsets'])
            used, values = huisken_profile(self.arrival, record.location, start, scale, offsets)
            rows.extend({'cluster': index, 't': start + s, 'F': v} for s, v in zip(used, values))
            monotone &= len(values) > 1 and is_nonincreasing(values, ACCEPTANCE_CONFIG['huisken_slack'])
        if rows:
            self.writer.export_to_csv(rows, self.writer.path('huisken.csv'))
            self.report.flag('huisken_monotonicity', monotone, slack=ACCEPTANCE_CONFIG['huisken_slack'])


def _set_threads(threads: int):
    if threads > 0:
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def run_scenario(target: str, output_dir: Optional[str] = None, emit_every: Optional[int] = None,
                 threads: Optional[int] = None, record: bool = True) -> RunReport:
    """Run a scenario file (or builtin name) and record it in the run ledger"""
    path = resolve_config(target)
    config = ScenarioConfig.from_file(path)
    if emit_every is not None:
        config.set('output.emit_every', emit_every)
    threads = env_config.threads if threads is None else threads
    _set_threads(threads)

    runner = ScenarioRunner(config, output_dir, threads)
    ledger = RunLedger(output_dir=runner.output_dir) if record else None
    run_id = ledger.start_run(config.name, path, runner.output_dir) if ledger else None
    try:
        report = runner.run()
    except Exception as e:
        if ledger:
            ledger.fail_run(run_id, str(e))
        raise
    report.run_id = run_id
    if ledger:
        ledger.complete_run(run_id, report.extinction_time, len(report.records), report.flags)
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='levelset-lab',
                                     description='Arrival time and singularity laboratory for mean-convex '
                                                 'level set flow')
    parser.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='run a scenario file or builtin scenario')
    run.add_argument('config', help='scenario file or builtin name')
    run.add_argument('--output', default=None, help='output directory')
    run.add_argument('--emit-every', type=int, default=None, help='write a snapshot every N steps')
    run.add_argument('--threads', type=int, default=None, help='worker threads (0 = library default)')
    run.add_argument('--no-ledger', action='store_true', help='do not record the run in the ledger')

    commands.add_parser('list', help='list builtin scenarios and the scenario schema')

    validate = commands.add_parser('validate', help='check a scenario file without running it')
    validate.add_argument('config', help='scenario file or builtin name')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or env_config.log_level, env_config.log_file)

    if args.command == 'list':
        print(list_scenarios())
        return EXIT_OK

    if args.command == 'validate':
        try:
            print(validate_config(args.config))
            return EXIT_OK
        except (LevelSetError, OSError) as e:
            logger.error(f"Invalid scenario {args.config}: {e}")
            print(f"INVALID {e}")
            return EXIT_ERROR

    try:
        report = run_scenario(args.config, args.output, args.emit_every, args.threads,
                              record=not args.no_ledger)
    except Exception as e:
        logger.error(f"Scenario {args.config} failed: {e}", exc_info=True)
        return EXIT_ERROR

    print(f"Scenario {report.scenario}: extinction time {report.extinction_time:.6f}, "
          f"{len(report.records)} singular records")
    for name, entry in report.flags.items():
        print(f"  {'PASS' if entry['passed'] else 'FAIL'}  {name}")
    print(f"Artifacts in {report.output_dir}")
    return report.exit_code


if __name__ == '__main__':
    sys.exit(main())
