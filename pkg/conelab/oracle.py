"""Cone oracle over a stdio pipe.

Each request is an ASCII command line (MEMBER, SYM, EXP, DIM, QUIT)
terminated by a newline, followed by its argument arrays. Arrays on the
wire are a little-endian uint32 element count followed by that many
little-endian float64 values. Every reply is one array; an empty reply
signals an error on the server side.

    MEMBER x    -> [code]   (0 Outside, 1 Boundary, 2 Interior)
    SYM p x     -> s_p(x)
    EXP a       -> exp_chart(a)
    DIM         -> [dim]

Run a server with ``python -m conelab.oracle --catalog sym_real --n 2``.
"""
from __future__ import annotations

import argparse
import logging
import struct
import subprocess
import sys
import threading
from typing import BinaryIO

import numpy as np

from config.constants import MEMBERSHIP_CODES, ORACLE_COMMANDS
from conelab.errors import ConeLabError, OracleProtocolError
from conelab.geom import ConeOracle, cone_oracle
from conelab.jalg import AlgebraSpec

logger = logging.getLogger(__name__)

_COUNT = struct.Struct("<I")
_ARITY = {"MEMBER": 1, "SYM": 2, "EXP": 1, "DIM": 0, "QUIT": 0}
_VERDICTS = {code: name for name, code in MEMBERSHIP_CODES.items()}


def write_array(stream: BinaryIO, values) -> None:
    arr = np.ascontiguousarray(values, dtype="<f8").reshape(-1)
    stream.write(_COUNT.pack(arr.size))
    stream.write(arr.tobytes())
    stream.flush()


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    data = b""
    while len(data) < size:
        chunk = stream.read(size - len(data))
        if not chunk:
            raise OracleProtocolError(detail=f"stream closed after {len(data)} of {size} bytes")
        data += chunk
    return data


def read_array(stream: BinaryIO) -> np.ndarray:
    (count,) = _COUNT.unpack(_read_exact(stream, _COUNT.size))
    return np.frombuffer(_read_exact(stream, 8 * count), dtype="<f8").astype(float)


def serve_oracle(A: AlgebraSpec, stdin: BinaryIO, stdout: BinaryIO) -> int:
    """Answer oracle requests for ``A`` until QUIT or end of input.

    Returns:
        int: number of requests served
    """
    oracle = cone_oracle(A)
    served = 0
    while True:
        line = stdin.readline()
        if not line:
            break
        command = line.decode("ascii", errors="replace").strip().upper()
        if command not in ORACLE_COMMANDS:
            logger.error(f"Unknown oracle command {command!r}")
            write_array(stdout, [])
            continue
        if command == "QUIT":
            break
        args = [read_array(stdin) for _ in range(_ARITY[command])]
        try:
            if command == "MEMBER":
                reply = [MEMBERSHIP_CODES[oracle.membership(args[0])]]
            elif command == "SYM":
                reply = oracle.symmetry(args[0], args[1])
            elif command == "EXP":
                reply = oracle.exp_chart(args[0])
            else:
                reply = [float(A.dim)]
        except ConeLabError as e:
            logger.warning(f"{command} failed: {e}")
            reply = []
        write_array(stdout, reply)
        served += 1
    logger.info(f"Oracle for {A.name} served {served} requests")
    return served


class SubprocessConeOracle:
    """Client side of the stdio protocol; usable wherever a ConeOracle is expected."""

    def __init__(self, argv: list[str]):
        self.argv = list(argv)
        self._proc = subprocess.Popen(self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        self._lock = threading.Lock()
        self.dim = int(self._call("DIM")[0])
        self.base_point = self._call("EXP", np.zeros(self.dim))

    def _call(self, command: str, *arrays) -> np.ndarray:
        with self._lock:
            if self._proc.poll() is not None:
                raise OracleProtocolError(detail=f"oracle process exited ({self._proc.returncode})")
            self._proc.stdin.write(f"{command}\n".encode("ascii"))
            for arr in arrays:
                write_array(self._proc.stdin, arr)
            self._proc.stdin.flush()
            reply = read_array(self._proc.stdout)
        if reply.size == 0:
            raise OracleProtocolError(detail=f"{command} rejected by the oracle")
        return reply

    def membership(self, x) -> str:
        code = float(self._call("MEMBER", x)[0])
        if code not in _VERDICTS:
            raise OracleProtocolError(detail=f"unknown membership code {code}")
        return _VERDICTS[code]

    def symmetry(self, p, x) -> np.ndarray:
        return self._call("SYM", p, x)

    def exp_chart(self, a) -> np.ndarray:
        return self._call("EXP", a)

    def as_cone_oracle(self) -> ConeOracle:
        return ConeOracle(dim=self.dim, membership=self.membership, symmetry=self.symmetry,
                          exp_chart=self.exp_chart, base_point=self.base_point)

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.write(b"QUIT\n")
                self._proc.stdin.flush()
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def main(argv: list[str] | None = None) -> int:
    from conelab.loader import algebra_from_args

    parser = argparse.ArgumentParser(description="Serve a cone oracle over stdin/stdout")
    parser.add_argument("--catalog", help="Catalog algebra name")
    parser.add_argument("--n", type=int, help="Matrix size or abelian dimension")
    parser.add_argument("--k", type=int, help="Spin factor rank")
    parser.add_argument("--file", help="Algebra JSON file")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
    A = algebra_from_args(catalog=args.catalog, n=args.n, k=args.k, file=args.file)
    serve_oracle(A, sys.stdin.buffer, sys.stdout.buffer)
    return 0


if __name__ == "__main__":
    sys.exit(main())
