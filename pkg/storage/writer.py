"""
Единственный писатель артефактов эксперимента.

Все записи идут через ArtifactWriter во временный каталог рядом с каталогом
результатов: запись сериализуется блокировкой, а при успешном выходе из контекста
формируется manifest.json и временный каталог переносится на место каталога результатов.
При ошибке временный каталог удаляется, и каталог результатов остается нетронутым.
"""
import hashlib
import json
import logging
import os
import shutil
import tempfile
import threading
from typing import Any, Dict, List, Optional

from utils.errors import IoFailure

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def is_empty_dir(path: str) -> bool:
    """Каталог не существует или пуст"""
    return not os.path.exists(path) or (os.path.isdir(path) and not os.listdir(path))


class ArtifactWriter:
    """
    Контекстный менеджер записи артефактов.

    Использование:
    with ArtifactWriter(out_dir) as writer:
        writer.write_text("fig4/counts.csv", text)
    manifest = writer.manifest
    """

    def __init__(self, out_dir: str):
        self.out_dir = os.path.abspath(out_dir)
        self._lock = threading.Lock()
        self._entries: Dict[str, Dict[str, Any]] = {}
        self._staging: Optional[str] = None
        self.manifest: Optional[List[Dict[str, Any]]] = None

    def __enter__(self) -> "ArtifactWriter":
        if not is_empty_dir(self.out_dir):
            raise IoFailure(f"Каталог {self.out_dir} не пуст: укажите новый каталог результатов")
        parent = os.path.dirname(self.out_dir)
        try:
            os.makedirs(parent, exist_ok=True)
            self._staging = tempfile.mkdtemp(prefix=f".{os.path.basename(self.out_dir)}-", dir=parent)
            os.chmod(self._staging, 0o755)
        except OSError as e:
            raise IoFailure(f"Не удалось создать каталог в {parent}: {e}") from e
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type is None:
            try:
                entries = self._write_manifest()
                self._commit()
                self.manifest = entries
            except BaseException:
                self._discard()
                raise
        else:
            logger.error(f"Запись артефактов прервана: {exc_val}")
            self._discard()
        return False

    def write_bytes(self, relative_path: str, payload: bytes) -> str:
        """
        Записывает файл и регистрирует его в манифесте.

        Args:
            relative_path: Путь относительно каталога результатов
            payload: Содержимое

        Returns:
            Полный путь к файлу после завершения записи
        """
        path = os.path.join(self._staging, relative_path)
        with self._lock:
            try:
                os.makedirs(os.path.dirname(path), exist_ok=True)
                with open(path, "wb") as handle:
                    handle.write(payload)
            except OSError as e:
                raise IoFailure(f"Не удалось записать {relative_path}: {e}") from e
            self._entries[relative_path] = {
                "path": relative_path,
                "bytes": len(payload),
                "sha256": hashlib.sha256(payload).hexdigest(),
            }
        logger.debug(f"Записан артефакт {relative_path} ({len(payload)} байт)")
        return os.path.join(self.out_dir, relative_path)

    def write_text(self, relative_path: str, text: str) -> str:
        return self.write_bytes(relative_path, text.encode("utf-8"))

    def write_json(self, relative_path: str, payload: Any) -> str:
        return self.write_text(relative_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def _write_manifest(self) -> List[Dict[str, Any]]:
        entries = [self._entries[key] for key in sorted(self._entries)]
        # Манифест перечисляет и себя, без контрольной суммы
        entries.append({"path": MANIFEST_NAME, "bytes": None, "sha256": None})
        path = os.path.join(self._staging, MANIFEST_NAME)
        try:
            with open(path, "w", encoding="utf-8") as handle:
                json.dump({"files": entries}, handle, indent=2)
                handle.write("\n")
        except OSError as e:
            raise IoFailure(f"Не удалось записать манифест: {e}") from e
        return entries

    def _commit(self):
        try:
            if os.path.isdir(self.out_dir):
                os.rmdir(self.out_dir)
            os.replace(self._staging, self.out_dir)
        except OSError as e:
            raise IoFailure(f"Не удалось перенести результаты в {self.out_dir}: {e}") from e
        self._staging = None
        logger.info(f"Манифест: {len(self._entries) + 1} файлов в {self.out_dir}")

    def _discard(self):
        if self._staging is not None:
            shutil.rmtree(self._staging, ignore_errors=True)
            self._staging = None
