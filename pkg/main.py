#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
主程序入口
负责悬浮光力系统纠缠模拟器的命令行：运行复现场景、拟合腔模腰斑、运行不变量检查

退出码: 0 成功；2 配置或参数错误；3 数值错误或不变量检查失败
"""

import argparse
import copy
import logging
import math
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

# 添加项目根目录到路径
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from sweeps.invariant_suite import run_invariant_suite
from sweeps.result_table import emit_csv
from sweeps.scenario_runner import SCENARIOS, run_scenario
from utils.config_loader import deep_merge, fit_cavity_waist, load_config, read_raw_config
from utils.exceptions import ConfigError, NumericalError, ParameterError
from utils.logger import setup_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), "config", "config.yaml")


def _configure_logging(args, logging_section: Optional[dict] = None):
    """命令行参数优先，其次为配置文件中的 logging 段"""
    section = logging_section or {}
    setup_logger(log_level=args.log_level or section.get("level", "INFO"),
                 log_file=args.log_file or section.get("file"),
                 max_size_mb=section.get("max_size_mb", 10),
                 backup_count=section.get("backup_count", 5))


def command_run(args) -> int:
    """运行一个复现场景并写出 CSV"""
    config = load_config(args.config)
    _configure_logging(args, config.logging)
    logger.info(f"运行场景 {args.scenario}，κ/2π = {config.system.kappa / (2 * math.pi):.4e} Hz")
    table = run_scenario(args.scenario, config, jobs=args.jobs)
    emit_csv(table, args.out)
    return EXIT_OK


def command_fit_waist(args) -> int:
    """按目标耦合拟合腔模腰斑并输出到标准输出"""
    raw = read_raw_config(args.config)
    _configure_logging(args, raw.get("logging"))
    if not isinstance(raw.get(args.section), dict):
        raise ConfigError(args.section, "缺少配置段")
    section = raw[args.section]
    default_kind = "torsional"
    if args.section == "com_system":
        overlay = copy.deepcopy(section)
        overlay.setdefault("mode", {}).setdefault("kind", "com")
        section = deep_merge(raw.get("system") or {}, overlay)
        default_kind = "com"
    target = None if args.target_hz is None else 2.0 * math.pi * args.target_hz
    waist = fit_cavity_waist(section, args.section, target=target, default_kind=default_kind)
    print(f"waist_um={waist * 1e6:.10g}")
    return EXIT_OK


def command_check(args) -> int:
    """运行不变量检查，有任何一项失败时返回 3"""
    _configure_logging(args)
    results = run_invariant_suite(seed=args.seed)
    print(results.to_string(index=False))
    if not results["passed"].all():
        failed = ", ".join(results.loc[~results["passed"], "check"])
        logger.error(f"不变量检查失败: {failed}")
        return EXIT_NUMERICAL
    logger.info("全部不变量检查通过")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levitosim", description="悬浮椭球光力系统纠缠模拟器")
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        help="日志级别（默认取配置文件 logging.level 或 INFO）")
    parser.add_argument("--log-file", default=None, help="日志文件路径")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="运行复现场景并输出 CSV")
    run_parser.add_argument("scenario", choices=list(SCENARIOS), help="场景名")
    run_parser.add_argument("--config", default=DEFAULT_CONFIG, help="配置文件路径")
    run_parser.add_argument("--out", required=True, help="输出 CSV 路径")
    run_parser.add_argument("--jobs", type=int, default=None,
                            help="并行进程数（默认取 LEVITOSIM_JOBS、numerics.jobs 或 CPU 数）")
    run_parser.set_defaults(handler=command_run)

    fit_parser = subparsers.add_parser("fit-waist", help="按目标相干散射耦合拟合腔模腰斑")
    fit_parser.add_argument("--config", default=DEFAULT_CONFIG, help="配置文件路径")
    fit_parser.add_argument("--section", default="system", choices=["system", "com_system"], help="配置段")
    fit_parser.add_argument("--target-hz", type=float, default=None,
                            help="目标耦合 g/2π [Hz]，默认取 cavity.target_coupling_hz")
    fit_parser.set_defaults(handler=command_fit_waist)

    check_parser = subparsers.add_parser("check", help="运行不变量检查")
    check_parser.add_argument("--seed", type=int, default=0, help="随机种子")
    check_parser.set_defaults(handler=command_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    load_dotenv()
    args = build_parser().parse_args(argv)
    _configure_logging(args)

    try:
        return args.handler(args)
    except (ConfigError, ParameterError) as e:
        logger.error(f"配置错误: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"数值错误: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
