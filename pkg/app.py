#!/usr/bin/env python3
"""
共形焊接 / 带装配球面数值工具

功能：
1. norm / chi: 级数的 Bergman、Dirichlet、双曲上确界、Besov 范数与 χ 坐标
2. weld: 圆周同胚的共形焊接
3. schiffer-sweep: Schiffer 变分下交比坐标的扫描
4. sew / equiv: 带装配球面的缝合与模空间等价判定
5. verify-suite: 分析引理的数值检验套件

退出码：0 全部通过，1 数值失败（报告写入输出文件），2 参数或输入文件解析错误
"""

import argparse
import json
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import yaml

from errors import ConfigurationError, WeldKitError
from norms import (
    DEFAULT_LADDER,
    PolarGrid,
    besov_norm,
    bergman_norm,
    dirichlet_norm,
    sup_hyp_norm,
)
from pre_schwarzian import chi, oqco_membership
from reports import append_log, read_json, write_csv, write_json
from rigged_sphere import NonOverlappingMaps, RiggedSphere, moduli_equivalent, sew_caps
from schiffer import SWEEP_COLUMNS, PuncturedSphereConfig, default_config, holomorphy_probe, sweep
from series_core import PowerSeries, is_power_of_two
from verify_harness import run_suite, standard_manifest
from welding import CircleHomeo, weld

COMMANDS = ('norm', 'chi', 'weld', 'schiffer-sweep', 'sew', 'equiv', 'verify-suite')
JOBS_ENV = 'WELDKIT_JOBS'


def _merge(base: Dict, override: Optional[Dict]) -> Dict:
    """逐节合并用户配置"""
    merged = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


class JobRunner:
    """按配置文件和命令行参数执行一个作业"""

    def __init__(self, config_path: str = "config.yaml"):
        """初始化"""
        self.config = _merge(self._default_config(), self._load_config(config_path))
        self.logs_dir = Path(self.config['output']['logs_dir'])

    def _load_config(self, config_path: str) -> dict:
        """加载配置"""
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        except FileNotFoundError:
            print(f"⚠️ 配置文件 {config_path} 不存在，使用默认配置")
            return {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"配置文件 {config_path} 解析失败: {e}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"配置文件 {config_path} 顶层必须是映射")
        return data

    def _default_config(self) -> dict:
        """默认配置"""
        return {
            'series': {
                'truncation': 256,
                'samples': 1024,
            },
            'norms': {
                'ladder': list(DEFAULT_LADDER),
                'divergence_threshold': 1e3,
                'slope_threshold': 0.5,
            },
            'welding': {
                'tol': 1e-10,
                'max_iter': 50,
                'guard': 0.5,
                'n_max': 512,
            },
            'schiffer': {
                'guard': 0.3,
                'deltas': [4e-3, 2e-3, 1e-3],
                'probe_tol': 1e-12,
                'sweep_radius': 1e-2,
                'sweep_steps': 5,
            },
            'rigged': {
                'boundary_tol': 1e-6,
            },
            'suite': {
                'seeds': 50,
                'jobs': 1,
            },
            'output': {
                'logs_dir': './logs',
                'reports_dir': './reports',
            },
        }

    # ------------------------------------------------------------------
    # 参数
    # ------------------------------------------------------------------
    def jobs(self, args) -> int:
        if args.jobs is not None:
            return max(1, args.jobs)
        env = os.environ.get(JOBS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise ConfigurationError(f"环境变量 {JOBS_ENV}={env!r} 不是整数")
        return max(1, int(self.config['suite']['jobs']))

    def tol(self, args, default: float) -> float:
        return args.tol if args.tol is not None else default

    def _inputs(self, args, count: int) -> List[Dict]:
        paths = args.input or []
        if len(paths) < count:
            raise ConfigurationError(f"{args.command} 需要 {count} 个 --input，实际 {len(paths)} 个")
        try:
            return [read_json(p) for p in paths[:count]]
        except FileNotFoundError as e:
            raise ConfigurationError(f"输入文件不存在: {e.filename}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"输入文件不是合法 JSON: {e}")

    def truncation(self, args) -> int:
        n = args.truncation or int(self.config['series']['truncation'])
        if n < 2:
            raise ConfigurationError(f"截断长度必须 >= 2，当前 {n}")
        return n

    def samples(self, args) -> int:
        """采样点数 M：2 的幂且 M >= 2N"""
        m = args.samples or int(self.config['series']['samples'])
        n = self.truncation(args)
        if not is_power_of_two(m):
            raise ConfigurationError(f"采样数 M={m} 不是 2 的幂")
        if m < 2 * n:
            raise ConfigurationError(f"混叠保护: 需要 M >= 2N，当前 M={m}, N={n}")
        return m

    def _series(self, data: Dict, args) -> PowerSeries:
        if isinstance(data, dict) and 'series' in data:
            data = data['series']
        return PowerSeries.from_json(data).resize(self.truncation(args))

    @staticmethod
    def _field(data, key: str, default):
        return data.get(key, default) if isinstance(data, dict) else default

    # ------------------------------------------------------------------
    # 命令
    # ------------------------------------------------------------------
    def cmd_norm(self, args) -> Tuple[Dict, bool]:
        data = self._inputs(args, 1)[0]
        s = self._series(data, args)
        kind = self._field(data, 'norm', 'bergman')
        if kind == 'bergman':
            value, converged, extra = bergman_norm(s), True, {}
        elif kind == 'dirichlet':
            value, converged, extra = dirichlet_norm(s), True, {}
        elif kind == 'sup_hyp':
            report = sup_hyp_norm(s, PolarGrid(n_angular=self.samples(args)))
            value, converged, extra = report.norm, report.converged, report.to_json()
        elif kind == 'besov':
            try:
                p = float(self._field(data, 'p', 2.0))
            except (TypeError, ValueError):
                raise ConfigurationError(f"Besov 指数 p 不是数值: {data.get('p')!r}")
            report = besov_norm(s, p)
            value, converged, extra = report.norm, report.converged, report.to_json()
        else:
            raise ConfigurationError(f"未知范数类型: {kind}")
        payload = {'norm': value, 'converged': converged, 'kind': kind, 'grid': extra.get('grid', {})}
        if 'lower_bound' in extra:
            payload['lower_bound'] = extra['lower_bound']
        print(f"📊 {kind} 范数 = {value:.12g}")
        return payload, converged

    def cmd_chi(self, args) -> Tuple[Dict, bool]:
        f = self._series(self._inputs(args, 1)[0], args)
        coords = chi(f)
        cfg = self.config['norms']
        verdict = oqco_membership(f, cfg['ladder'], cfg['divergence_threshold'], cfg['slope_threshold'])
        print(f"📊 ‖A(f)‖ = {bergman_norm(coords.phi):.12g}，判定: {verdict.verdict}")
        return {'coords': coords.to_json(), 'membership': verdict.to_json()}, True

    def cmd_weld(self, args) -> Tuple[Dict, bool]:
        h = CircleHomeo.from_json(self._inputs(args, 1)[0])
        cfg = self.config['welding']
        tol = self.tol(args, cfg['tol'])
        pair = weld(h, tol=tol, max_iter=cfg['max_iter'], guard=cfg['guard'],
                    n_max=args.truncation or cfg['n_max'])
        print(f"📊 焊接残差 {pair.residual:.3e}，截断 {pair.F.N}")
        return pair.to_json(), pair.residual < tol

    def cmd_schiffer_sweep(self, args) -> Tuple[Dict, bool]:
        cfg = self.config['schiffer']
        data = self._inputs(args, 1)[0] if args.input else default_config().to_json()
        if isinstance(data, dict) and 'guard' not in data:
            data = dict(data, guard=cfg['guard'])
        config = PuncturedSphereConfig.from_json(data)
        rows = sweep(config, radius=cfg['sweep_radius'], steps=cfg['sweep_steps'],
                     jobs=self.jobs(args), tol=self.tol(args, self.config['welding']['tol']))
        probe = holomorphy_probe(config, deltas=cfg['deltas'], tol=cfg['probe_tol'])
        table = Path(args.output).with_suffix('.csv') if args.output else Path('sweep.csv')
        write_csv(table, SWEEP_COLUMNS, rows)
        print(f"💾 扫描表已保存: {table}")
        ratio = probe.ratios[-1]
        print(f"📊 CR 比值 {ratio:.3e}（δ={probe.rows[-1].delta:g}）")
        passed = ratio < 1e-3 and probe.decreasing and probe.derivative != 0
        return {'config': config.to_json(), 'table': str(table), 'holomorphy': probe.to_json()}, passed

    def cmd_sew(self, args) -> Tuple[Dict, bool]:
        rigged = RiggedSphere.from_json(self._inputs(args, 1)[0])
        cfg = self.config['welding']
        tol = self.tol(args, cfg['tol'])
        result = sew_caps(rigged, tol=tol, max_iter=cfg['max_iter'], guard=cfg['guard'])
        print(f"📊 刺点: {[complex(p) for p in result.punctures]}")
        return result.to_json(), all(r < tol for r in result.residuals)

    def cmd_equiv(self, args) -> Tuple[Dict, bool]:
        a, b = (NonOverlappingMaps.from_json(d) for d in self._inputs(args, 2))
        report = moduli_equivalent(a, b, tol=self.tol(args, self.config['rigged']['boundary_tol']))
        print(f"📊 等价: {'是' if report.equivalent else '否'}，边界距离 {report.boundary_distance:.3e}")
        return report.to_json(), True

    def cmd_verify_suite(self, args) -> Tuple[Dict, bool]:
        if args.input:
            manifest = self._inputs(args, 1)[0]
        else:
            manifest = standard_manifest(self.config['suite']['seeds'], start=args.seed or 0)
        out_dir = Path(args.output) if args.output else Path(self.config['output']['reports_dir'])
        result = run_suite(manifest, jobs=self.jobs(args), output_dir=out_dir, logs_dir=self.logs_dir)
        return {'passed': result.passed, 'rows': [list(r) for r in result.rows]}, result.passed

    # ------------------------------------------------------------------
    def run(self, args) -> int:
        handler = getattr(self, 'cmd_' + args.command.replace('-', '_'))
        start_time = datetime.now()
        print("=" * 50)
        print(f"🚀 {args.command}")
        print("=" * 50)
        output = None
        if args.output and args.command not in ('verify-suite', 'schiffer-sweep'):
            output = Path(args.output)
        elif args.output and args.command == 'schiffer-sweep':
            output = Path(args.output).with_suffix('.json')
        try:
            payload, passed = handler(args)
        except ConfigurationError as e:
            print(f"❌ 输入错误: {e}")
            return 2
        except WeldKitError as e:
            print(f"❌ {type(e).__name__}: {e}")
            if output is not None:
                write_json(output, {'error': type(e).__name__, 'message': str(e),
                                    'residual': getattr(e, 'residual', None)})
            append_log(self.logs_dir, start_time, datetime.now(), args.command,
                       [f"❌ {type(e).__name__}: {e}"])
            return 1
        if output is not None:
            write_json(output, payload)
            print(f"💾 结果已保存: {output}")
        mark = '✅' if passed else '❌'
        print(f"{mark} {'通过' if passed else '未通过'}")
        if args.command != 'verify-suite':
            append_log(self.logs_dir, start_time, datetime.now(), args.command, [f"{mark} passed={passed}"])
        return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='app.py', description='共形焊接与带装配球面数值工具')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--input', action='append', help='输入 JSON（equiv 需要两个）')
    parser.add_argument('--output', help='输出文件（verify-suite 为目录）')
    parser.add_argument('--truncation', type=int, help='截断长度 N')
    parser.add_argument('--samples', type=int, help='采样点数 M')
    parser.add_argument('--tol', type=float, help='容差')
    parser.add_argument('--seed', type=int, help='随机种子（套件起始种子）')
    parser.add_argument('--jobs', type=int, help=f'线程数（默认读 {JOBS_ENV}）')
    parser.add_argument('--config', default='config.yaml', help='配置文件')
    return parser


def validate_args(args):
    if args.truncation is not None and args.truncation < 2:
        raise ConfigurationError(f"--truncation 必须 >= 2，当前 {args.truncation}")
    if args.samples is not None and (args.samples < 2 or args.samples & (args.samples - 1)):
        raise ConfigurationError(f"--samples 必须是 2 的幂，当前 {args.samples}")
    if args.tol is not None and not args.tol > 0:
        raise ConfigurationError(f"--tol 必须为正，当前 {args.tol}")
    if args.jobs is not None and args.jobs < 1:
        raise ConfigurationError(f"--jobs 必须 >= 1，当前 {args.jobs}")


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        validate_args(args)
        runner = JobRunner(args.config)
    except ConfigurationError as e:
        print(f"❌ {e}")
        return 2
    return runner.run(args)


if __name__ == "__main__":
    sys.exit(main())
