#!/usr/bin/env python3
"""
结果文件与运行日志

- write_json: JSON 报告（复数写成 [re, im]，浮点用最短往返表示，结果逐字节可复现）
- write_csv: CSV 表格
- append_log: 按日期追加到 logs/YYYY-MM-DD.log
"""

import csv
import json
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

PathLike = Union[str, Path]


def to_plain(value):
    """把 numpy / 复数结构转换为 JSON 可序列化的对象"""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def dumps(data) -> str:
    return json.dumps(to_plain(data), ensure_ascii=False, indent=2)


def write_json(path: PathLike, data) -> Path:
    path = Path(path)
    if path.parent:
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dumps(data))
        f.write("\n")
    return path


def read_json(path: PathLike):
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    if path.parent:
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def format_duration(seconds: float) -> str:
    """格式化时长"""
    duration = timedelta(seconds=int(seconds))
    hours, remainder = divmod(duration.seconds, 3600)
    minutes, secs = divmod(remainder, 60)

    if duration.days > 0:
        return f"{duration.days}天 {hours}小时 {minutes}分钟 {secs}秒"
    elif hours > 0:
        return f"{hours}小时 {minutes}分钟 {secs}秒"
    elif minutes > 0:
        return f"{minutes}分钟 {secs}秒"
    else:
        return f"{secs}秒"


def append_log(logs_dir: PathLike, start_time: datetime, end_time: datetime,
               command: str, lines: List[str]) -> Path:
    """保存运行日志"""
    logs_dir = Path(logs_dir)
    logs_dir.mkdir(parents=True, exist_ok=True)
    log_path = logs_dir / (start_time.strftime("%Y-%m-%d") + ".log")
    duration = (end_time - start_time).total_seconds()

    content = ["=" * 50]
    content.append(f"📅 开始时间: {start_time.strftime('%Y-%m-%d %H:%M:%S')}")
    content.append(f"📅 结束时间: {end_time.strftime('%Y-%m-%d %H:%M:%S')}")
    content.append(f"⏱️ 运行时长: {format_duration(duration)}")
    content.append(f"🔧 命令: {command}")
    content.extend(lines)
    content.append("=" * 50)
    content.append("")

    with open(log_path, 'a', encoding='utf-8') as f:
        f.write("\n".join(content))
    return log_path
