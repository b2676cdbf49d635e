"""
CSV 读写
矩阵、站点坐标、稀疏因子、排序导出、MCMC 链与 benchmark 长表
数值一律以 %.17g 写出，同样的输入重跑得到逐字节相同的文件
"""
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from assembly import SparseICF, factor_from_triplets, off_diagonal_triplets
from errors import InputError, InvalidFactor
from geometry import LocationSet, OrderedGeometry
from models import BenchmarkRecord

FLOAT_FORMAT = "%.17g"


def _to_csv(df: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    return path


def _has_header(path: Path) -> bool:
    """首行含非数值字段时视为表头"""
    with path.open(encoding="utf-8") as f:
        first = f.readline().strip()
    if not first:
        return False
    for token in first.split(","):
        try:
            float(token)
        except ValueError:
            return True
    return False


def write_matrix(path: str | Path, M: np.ndarray, prefix: str = "s") -> Path:
    """写出矩阵，表头为 s0,s1,...；0 行时只写表头"""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return _to_csv(pd.DataFrame(M, columns=[f"{prefix}{j}" for j in range(M.shape[1])]), path)


def read_matrix(path: str | Path) -> np.ndarray:
    """读取数值矩阵，自动识别可选表头"""
    path = Path(path)
    if not path.exists():
        raise InputError(f"file not found: {path}")
    try:
        df = pd.read_csv(path, header=0 if _has_header(path) else None)
    except pd.errors.EmptyDataError as e:
        raise InputError(f"{path} is empty") from e
    try:
        M = df.to_numpy(dtype=float)
    except ValueError as e:
        raise InputError(f"{path} contains non-numeric values") from e
    if M.ndim != 2 or (M.size and not np.all(np.isfinite(M))):
        raise InputError(f"{path} contains non-finite values")
    return M


def write_locations(path: str | Path, locs: LocationSet) -> Path:
    names = ["x", "y"] if locs.p == 2 else [f"c{j}" for j in range(locs.p)]
    return _to_csv(pd.DataFrame(locs.coords, columns=names), path)


def read_locations(path: str | Path) -> LocationSet:
    return LocationSet(read_matrix(path))


def save_factor(out_dir: str | Path, icf: SparseICF) -> tuple[Path, Path]:
    """
    factor_u.csv: row,col,value（U 的非对角元，有序下标）
    factor_d.csv: ordered_index,original_index,d
    """
    out_dir = Path(out_dir)
    rows, cols, vals = off_diagonal_triplets(icf)
    u_path = _to_csv(pd.DataFrame({"row": rows, "col": cols, "value": vals}), out_dir / "factor_u.csv")
    d_path = _to_csv(
        pd.DataFrame({"ordered_index": np.arange(icf.n), "original_index": icf.perm, "d": icf.d}),
        out_dir / "factor_d.csv",
    )
    return u_path, d_path


def load_factor(directory: str | Path) -> SparseICF:
    directory = Path(directory)
    u_path, d_path = directory / "factor_u.csv", directory / "factor_d.csv"
    for p in (u_path, d_path):
        if not p.exists():
            raise InputError(f"factor file not found: {p}")
    u_df = pd.read_csv(u_path)
    d_df = pd.read_csv(d_path)
    missing = {"row", "col", "value"} - set(u_df.columns) | {"ordered_index", "original_index", "d"} - set(d_df.columns)
    if missing:
        raise InvalidFactor(f"factor files are missing columns: {sorted(missing)}")
    d_df = d_df.sort_values("ordered_index")
    if not np.array_equal(d_df["ordered_index"].to_numpy(), np.arange(len(d_df))):
        raise InvalidFactor("factor_d.csv ordered_index must be 0..n-1")
    return factor_from_triplets(
        u_df["row"].to_numpy(dtype=np.int64),
        u_df["col"].to_numpy(dtype=np.int64),
        u_df["value"].to_numpy(dtype=float),
        d_df["d"].to_numpy(dtype=float),
        d_df["original_index"].to_numpy(dtype=np.int64),
    )


def write_ordering(path: str | Path, geometry: OrderedGeometry) -> Path:
    """ordered_index,original_index,neighbors（近邻为分号分隔的有序下标）"""
    df = pd.DataFrame({
        "ordered_index": np.arange(geometry.n),
        "original_index": geometry.perm,
        "neighbors": [";".join(str(int(j)) for j in g) for g in geometry.neighbors],
    })
    return _to_csv(df, path)


def read_ordering(path: str | Path) -> tuple[np.ndarray, list[np.ndarray]]:
    df = pd.read_csv(path, keep_default_na=False, dtype={"neighbors": str})
    perm = df["original_index"].to_numpy(dtype=np.int64)
    neighbors = [
        np.array([int(t) for t in s.split(";")], dtype=np.int64) if s else np.zeros(0, dtype=np.int64)
        for s in df["neighbors"]
    ]
    return perm, neighbors


def write_chain(
    path: str | Path,
    iterations: np.ndarray,
    theta_chain: np.ndarray,
    log_post: np.ndarray,
    accepted: np.ndarray,
) -> Path:
    """iter,theta1,theta2,theta3,log_post,accepted"""
    theta_chain = np.asarray(theta_chain, dtype=float).reshape(-1, 3)
    df = pd.DataFrame({
        "iter": np.asarray(iterations, dtype=np.int64),
        "theta1": theta_chain[:, 0],
        "theta2": theta_chain[:, 1],
        "theta3": theta_chain[:, 2],
        "log_post": np.asarray(log_post, dtype=float),
        "accepted": np.asarray(accepted, dtype=bool).astype(int),
    })
    return _to_csv(df, path)


def read_chain(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise InputError(f"chain file not found: {path}")
    df = pd.read_csv(path)
    missing = {"theta1", "theta2", "theta3"} - set(df.columns)
    if missing:
        raise InputError(f"{path} is missing columns: {sorted(missing)}")
    return df


def write_records(path: str | Path, records: Iterable[BenchmarkRecord]) -> Path:
    """benchmark 长表；奇异估计的值写为 inf"""
    rows = [r.model_dump() for r in records]
    columns = list(BenchmarkRecord.model_fields)
    return _to_csv(pd.DataFrame(rows, columns=columns), path)


def write_table(path: str | Path, columns: dict[str, Sequence], order: Optional[list[str]] = None) -> Path:
    """通用的列式表"""
    df = pd.DataFrame(columns)
    if order:
        df = df[order]
    return _to_csv(df, path)
