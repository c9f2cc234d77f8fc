"""JSON instance and decomposition files.

Schemas are strict: keys are exactly the documented ones and every number must
be a JSON number. Numbers are written with the shortest round-trip float
representation, so loading a saved file reproduces every array bit for bit.
"""

import json
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from orthoeq.decomposition import Decomposition
from orthoeq.equation import Instance, PointMap
from orthoeq.exceptions import FileFormatError
from orthoeq.linalg_core import LinearOperator, Pairing, Subspace

FILE_VERSION = 1


class Sample(BaseModel):
    """One row of a sample table, keyed "in" and "out"."""

    model_config = ConfigDict(extra="forbid", strict=True)

    input: list[float] = Field(alias="in")
    output: list[float] = Field(alias="out")


class InstanceFile(BaseModel):
    """On-disk form of an Instance."""

    model_config = ConfigDict(extra="forbid", strict=True)

    version: Literal[1] = FILE_VERSION
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    G_E: list[list[float]]
    G_F: list[list[float]]
    f_samples: list[Sample]
    g_samples: list[Sample]


class DecompositionFile(BaseModel):
    """On-disk form of a Decomposition. Bases are lists of column vectors."""

    model_config = ConfigDict(extra="forbid", strict=True)

    version: Literal[1] = FILE_VERSION
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    G_E: list[list[float]]
    G_F: list[list[float]]
    L_basis: list[list[float]]
    M_basis: list[list[float]]
    A: list[list[float]]
    phi_samples: list[Sample]
    psi_samples: list[Sample]


def _samples(table: PointMap) -> list[Sample]:
    return [
        Sample.model_validate({"in": x.tolist(), "out": y.tolist()})
        for x, y in zip(table.inputs, table.outputs, strict=True)
    ]


def _table(samples: list[Sample], domain_dim: int, codomain_dim: int) -> PointMap:
    return PointMap(
        domain_dim=domain_dim,
        codomain_dim=codomain_dim,
        inputs=[s.input for s in samples],
        outputs=[s.output for s in samples],
    )


def _subspace(vectors: list[list[float]], ambient_dim: int) -> Subspace:
    return Subspace.from_vectors([np.asarray(v, dtype=np.float64) for v in vectors], ambient_dim)


def instance_to_file(inst: Instance) -> InstanceFile:
    return InstanceFile(
        n=inst.n,
        m=inst.m,
        G_E=inst.e_pairing.gram.tolist(),
        G_F=inst.f_pairing.gram.tolist(),
        f_samples=_samples(inst.f),
        g_samples=_samples(inst.g),
    )


def file_to_instance(doc: InstanceFile) -> Instance:
    """Build the Instance a file describes.

    Raises:
        ValidationError: If the contents violate an Instance invariant.
    """
    return Instance(
        e_pairing=Pairing(dim=doc.n, gram=doc.G_E),
        f_pairing=Pairing(dim=doc.m, gram=doc.G_F),
        f=_table(doc.f_samples, doc.n, doc.m),
        g=_table(doc.g_samples, doc.n, doc.m),
    )


def decomposition_to_file(dec: Decomposition) -> DecompositionFile:
    return DecompositionFile(
        n=dec.e_pairing.dim,
        m=dec.f_pairing.dim,
        G_E=dec.e_pairing.gram.tolist(),
        G_F=dec.f_pairing.gram.tolist(),
        L_basis=[v.tolist() for v in dec.L.vectors],
        M_basis=[v.tolist() for v in dec.M.vectors],
        A=dec.A.matrix.tolist(),
        phi_samples=_samples(dec.phi),
        psi_samples=_samples(dec.psi),
    )


def file_to_decomposition(doc: DecompositionFile) -> Decomposition:
    """Build the Decomposition a file describes.

    Raises:
        ValidationError: If the contents violate a Decomposition invariant.
    """
    e_pairing = Pairing(dim=doc.n, gram=doc.G_E)
    L = _subspace(doc.L_basis, doc.m)
    k = L.rank - len(doc.M_basis)
    return Decomposition(
        L=L,
        M=_subspace(doc.M_basis, doc.m),
        A=LinearOperator(
            domain_dim=doc.n,
            codomain_dim=k,
            matrix=doc.A,
            domain_pairing=e_pairing,
            codomain_pairing=Pairing.standard(k) if k > 0 else None,
        ),
        phi=_table(doc.phi_samples, k, L.rank),
        psi=_table(doc.psi_samples, L.rank, doc.m),
        e_pairing=e_pairing,
        f_pairing=Pairing(dim=doc.m, gram=doc.G_F),
    )


def _location(error: ValidationError) -> str:
    first = error.errors()[0]
    loc = ".".join(str(part) for part in first["loc"])
    return f"field {loc}" if loc else "document"


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FileFormatError(str(path), "file", e.strerror or str(e)) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(str(path), f"line {e.lineno}, column {e.colno}", e.msg) from e


def _parse(path: Path, schema: type[BaseModel]) -> Any:
    raw = _read_json(path)
    try:
        return schema.model_validate(raw)
    except ValidationError as e:
        raise FileFormatError(str(path), _location(e), e.errors()[0]["msg"]) from e


def _build(path: Path, build: Any, doc: Any) -> Any:
    try:
        return build(doc)
    except (ValidationError, ValueError) as e:
        message = e.errors()[0]["msg"] if isinstance(e, ValidationError) else str(e)
        raise FileFormatError(str(path), "contents", message) from e


def load_instance(path: str | Path) -> Instance:
    """Read an instance file.

    Args:
        path: The JSON file.

    Returns:
        The validated Instance.

    Raises:
        FileFormatError: If the file cannot be read, parsed or validated.
    """
    path = Path(path)
    return _build(path, file_to_instance, _parse(path, InstanceFile))


def load_decomposition(path: str | Path) -> Decomposition:
    """Read a decomposition file; errors as load_instance."""
    path = Path(path)
    return _build(path, file_to_decomposition, _parse(path, DecompositionFile))


def dumps(doc: BaseModel) -> str:
    return json.dumps(doc.model_dump(by_alias=True), indent=2, allow_nan=False) + "\n"


def save_instance(inst: Instance, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps(instance_to_file(inst)), encoding="utf-8")
    return path


def save_decomposition(dec: Decomposition, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps(decomposition_to_file(dec)), encoding="utf-8")
    return path
