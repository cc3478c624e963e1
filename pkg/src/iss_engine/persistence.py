"""File-backed repositories: one directory per kind, one document per entity,
atomic writes, a SHA-256 index for change detection, and an advisory write
lock per repository.

Layout: <root>/{requirements,rps,services,sps,logs,pmm}/<id>.json, with SP
processes stored beside their JSON document as <id>.xml (BPMN subset).
The root can come from the ISS_ENGINE_ROOT environment variable.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from filelock import FileLock

from .errors import CorruptDocument, MissingDir, NotFound
from .model import ITree, RequirementPattern, ServicePattern, ServiceSpec, validate_itree
from .pmm import MatchingMatrix, matrix_from_dict, matrix_to_dict
from .serialization import (
    itree_from_dict,
    itree_to_dict,
    process_to_bpmn,
    process_from_bpmn,
    rp_from_dict,
    rp_to_dict,
    service_from_dict,
    service_to_dict,
    sp_from_dict,
    sp_to_dict,
)

ROOT_ENV_VAR = "ISS_ENGINE_ROOT"


def default_root() -> Path:
    return Path(os.environ.get(ROOT_ENV_VAR, "."))


class RepoKind(str, Enum):
    REQUIREMENT = "Requirement"
    RP = "RP"
    SERVICE = "Service"
    SP = "SP"
    LOG = "Log"
    PMM = "PMM"


_DIRNAMES = {
    RepoKind.REQUIREMENT: "requirements",
    RepoKind.RP: "rps",
    RepoKind.SERVICE: "services",
    RepoKind.SP: "sps",
    RepoKind.LOG: "logs",
    RepoKind.PMM: "pmm",
}


def _encode_requirement(tree: ITree) -> dict:
    violations = validate_itree(tree)
    if violations:
        raise ValueError(f"invalid tree: {violations}")
    return itree_to_dict(tree)


def _decode_requirement(d: dict) -> ITree:
    tree = itree_from_dict(d)
    if validate_itree(tree):
        raise CorruptDocument("stored tree fails validation")
    return tree


def _encode_log(doc: dict) -> dict:
    if not isinstance(doc, dict) or not isinstance(doc.get("id"), str):
        raise ValueError("log documents are dicts with a string 'id'")
    return doc


_CODECS = {
    RepoKind.REQUIREMENT: (_encode_requirement, _decode_requirement),
    RepoKind.RP: (rp_to_dict, rp_from_dict),
    RepoKind.SERVICE: (service_to_dict, service_from_dict),
    RepoKind.LOG: (_encode_log, lambda d: d),
    RepoKind.PMM: (matrix_to_dict, matrix_from_dict),
}

_EXPECTED_TYPES = {
    RepoKind.REQUIREMENT: ITree,
    RepoKind.RP: RequirementPattern,
    RepoKind.SERVICE: ServiceSpec,
    RepoKind.SP: ServicePattern,
    RepoKind.LOG: dict,
    RepoKind.PMM: MatchingMatrix,
}


@dataclass(frozen=True)
class IndexEntry:
    path: Path
    sha256: str


@dataclass
class Repository:
    root: Path
    kind: RepoKind
    index: dict[str, IndexEntry] = field(default_factory=dict)

    @property
    def directory(self) -> Path:
        return self.root / _DIRNAMES[self.kind]

    @property
    def _lock(self) -> FileLock:
        return FileLock(self.directory / ".lock")

    def refresh(self) -> None:
        self.index = {}
        for path in sorted(self.directory.glob("*.json")):
            doc_id = path.stem
            self._load(doc_id, path)  # validates; raises CorruptDocument
            self.index[doc_id] = IndexEntry(path, _sha256(path))

    def ids(self) -> list[str]:
        return sorted(self.index)

    def get(self, doc_id: str):
        entry = self.index.get(doc_id)
        if entry is None or not entry.path.exists():
            raise NotFound(f"{self.kind.value} document '{doc_id}' not found")
        return self._load(doc_id, entry.path)

    def values(self) -> list:
        return [self.get(i) for i in self.ids()]

    def put(self, doc_id: str, value) -> None:
        expected = _EXPECTED_TYPES[self.kind]
        if not isinstance(value, expected):
            raise ValueError(f"{self.kind.value} repository stores {expected.__name__}")
        own_id = getattr(value, "id", None) or (value.get("id") if isinstance(value, dict) else None)
        if own_id is not None and own_id != doc_id:
            raise ValueError(f"document id '{own_id}' does not match key '{doc_id}'")
        path = self.directory / f"{doc_id}.json"
        with self._lock:
            if self.kind is RepoKind.SP:
                xml = process_to_bpmn(value.process, process_id=doc_id)
                _atomic_write(self.directory / f"{doc_id}.xml", xml)
                payload = sp_to_dict(value, include_process=False)
            else:
                encode, _ = _CODECS[self.kind]
                payload = encode(value)
            _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
            self.index[doc_id] = IndexEntry(path, _sha256(path))

    def delete(self, doc_id: str) -> None:
        entry = self.index.get(doc_id)
        if entry is None:
            raise NotFound(f"{self.kind.value} document '{doc_id}' not found")
        with self._lock:
            entry.path.unlink(missing_ok=True)
            if self.kind is RepoKind.SP:
                (self.directory / f"{doc_id}.xml").unlink(missing_ok=True)
            del self.index[doc_id]

    def _load(self, doc_id: str, path: Path):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CorruptDocument(f"{path}: {exc}") from exc
        try:
            if self.kind is RepoKind.SP:
                xml_path = self.directory / f"{doc_id}.xml"
                if not xml_path.exists():
                    raise CorruptDocument(f"{xml_path}: missing SP process document")
                process = process_from_bpmn(xml_path.read_text(encoding="utf-8"))
                return sp_from_dict(data, process=process)
            _, decode = _CODECS[self.kind]
            return decode(data)
        except CorruptDocument:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptDocument(f"{path}: {exc}") from exc


def open_repo(root_dir, kind: RepoKind) -> Repository:
    """Open (creating the kind directory if needed) and index a repository
    under `root_dir`; every existing document is validated on the way in."""
    root = Path(root_dir)
    if not root.is_dir():
        raise MissingDir(f"repository root {root} does not exist")
    repo = Repository(root=root, kind=kind)
    repo.directory.mkdir(exist_ok=True)
    repo.refresh()
    return repo


def open_all(root_dir) -> dict[RepoKind, Repository]:
    return {kind: open_repo(root_dir, kind) for kind in RepoKind}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
