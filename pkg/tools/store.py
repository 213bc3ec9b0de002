"""On-disk cache of correlator tables.

One CSV file per table: a block of `# key: value` header lines followed by
`n,value` rows. Floats are written with repr, the shortest decimal that reads
back to the same double, so a round trip is bit-exact. Files are named
`v{format}-{digest}-n{n_max}.csv` where the digest covers (format, g,
quad_tol); any stored table with n_max >= the request serves it by prefix.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import os
import tempfile
from pathlib import Path

from errors import IoFailure, VersionConflict
from tfim.base import CorrelatorTable, Method, QuadratureConfig
from tfim.exact import correlator_table
from tfim.quadrature import DEFAULT_CONFIG

logger = logging.getLogger("qwd")

FORMAT_VERSION = 1
DEFAULT_CACHE_DIR = "./wcache"
HEADER_FIELDS = ("format_version", "g", "n_max", "quad_tol", "method")


def _digest(g: float, quad_tol: float) -> str:
    ident = f"v{FORMAT_VERSION}|g={float(g)!r}|tol={float(quad_tol)!r}"
    return hashlib.sha256(ident.encode("utf-8")).hexdigest()[:16]


def cache_key(g: float, n_max: int, quad_tol: float) -> str:
    return f"v{FORMAT_VERSION}-{_digest(g, quad_tol)}-n{n_max}"


def encode_table(table: CorrelatorTable) -> str:
    header = {
        "format_version": FORMAT_VERSION,
        "g": repr(float(table.g)),
        "n_max": table.n_max,
        "quad_tol": repr(float(table.tol)),
        "method": Method(table.method).value,
    }
    buf = io.StringIO()
    for name in HEADER_FIELDS:
        buf.write(f"# {name}: {header[name]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "value"])
    for n, value in enumerate(table.values, start=1):
        writer.writerow([n, repr(float(value))])
    return buf.getvalue()


def decode_table(text: str) -> CorrelatorTable:
    header = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            name, _, value = line[1:].partition(":")
            header[name.strip()] = value.strip()
        elif line:
            body.append(line)
    missing = [name for name in HEADER_FIELDS if name not in header]
    if missing:
        raise IoFailure(f"store: table header lacks {', '.join(missing)}")
    if header["format_version"] != str(FORMAT_VERSION):
        raise VersionConflict(
            f"store: format_version {header['format_version']} is not "
            f"{FORMAT_VERSION}"
        )
    rows = list(csv.DictReader(body))
    try:
        numbers = [int(row["n"]) for row in rows]
        table = CorrelatorTable(
            g=float(header["g"]),
            n_max=int(header["n_max"]),
            values=tuple(float(row["value"]) for row in rows),
            tol=float(header["quad_tol"]),
            method=Method(header["method"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IoFailure(f"store: malformed table: {exc}") from exc
    if numbers != list(range(1, len(rows) + 1)):
        raise IoFailure("store: table rows are not n = 1, 2, ...")
    return table


class TableStore:
    """Directory of immutable table files; safe for concurrent readers."""

    def __init__(self, root: str | os.PathLike | None = None):
        self.root = Path(root or os.environ.get("QWD_CACHE_DIR", DEFAULT_CACHE_DIR))

    def __repr__(self) -> str:
        return f"TableStore({str(self.root)!r})"

    def path_for(self, key: str) -> Path:
        return self.root / f"{key}.csv"

    def _stored_sizes(self, g: float, quad_tol: float) -> list[int]:
        prefix = f"v{FORMAT_VERSION}-{_digest(g, quad_tol)}-n"
        sizes = []
        for path in self.root.glob(f"{prefix}*.csv"):
            tail = path.stem[len(prefix) :]
            if tail.isdigit():
                sizes.append(int(tail))
        return sorted(sizes)

    def _read(self, path: Path) -> str:
        try:
            return path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"store: cannot read {path}: {exc}") from exc

    def get(self, g: float, n_max: int, quad_tol: float) -> CorrelatorTable | None:
        """The cached table, or None when nothing large enough is stored."""
        for size in self._stored_sizes(g, quad_tol):
            if size < n_max:
                continue
            path = self.path_for(cache_key(g, size, quad_tol))
            table = decode_table(self._read(path))
            if table.g != g or table.tol != quad_tol:
                logger.warning("ignoring %s: header does not match its name", path)
                continue
            logger.debug("cache hit %s for g=%r n_max=%d", path.name, g, n_max)
            return table.prefix(n_max)
        return None

    def put(self, table: CorrelatorTable) -> str:
        key = cache_key(table.g, table.n_max, table.tol)
        path = self.path_for(key)
        payload = encode_table(table).encode("utf-8")
        if path.exists():
            stored = hashlib.sha256(self._read(path).encode("utf-8")).hexdigest()
            if stored != hashlib.sha256(payload).hexdigest():
                raise VersionConflict(
                    f"store: {path.name} already holds a different table "
                    f"for g={table.g!r} n_max={table.n_max}"
                )
            return key
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".csv")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(payload)
                os.replace(tmp, path)
            except BaseException:
                Path(tmp).unlink(missing_ok=True)
                raise
        except OSError as exc:
            raise IoFailure(f"store: cannot write {path}: {exc}") from exc
        logger.debug("stored %s", path.name)
        return key

    def fetch(
        self, g: float, n_max: int, cfg: QuadratureConfig = DEFAULT_CONFIG
    ) -> CorrelatorTable:
        """Cached table if present, otherwise compute, store and return it."""
        table = self.get(g, n_max, cfg.target_abs_tol)
        if table is None:
            table = correlator_table(g, n_max, cfg)
            self.put(table)
        return table
