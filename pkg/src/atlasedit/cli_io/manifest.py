"""Append-only project journal.

Every command and serve-mode mutation appends one JSON line; nothing ever
rewrites earlier lines. Timestamps and timings live here, keeping the
deterministic artifacts (containers, frames, manifests) byte-stable across
same-seed reruns.
"""

from __future__ import annotations

import datetime
import json
import threading
from pathlib import Path
from typing import Any, Dict, List

JOURNAL_NAME = "manifest.jsonl"


class ProjectJournal:
    def __init__(self, project_dir):
        self.project_dir = Path(project_dir)
        self.path = self.project_dir / JOURNAL_NAME
        self._lock = threading.Lock()

    def append(self, event: str, **payload: Any) -> Dict[str, Any]:
        entry = {
            "ts": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "event": event,
            **payload,
        }
        line = json.dumps(entry, sort_keys=True)
        with self._lock:
            self.project_dir.mkdir(parents=True, exist_ok=True)
            with self.path.open("a") as handle:
                handle.write(line + "\n")
        return entry

    def entries(self) -> List[Dict[str, Any]]:
        if not self.path.exists():
            return []
        out = []
        with self.path.open() as handle:
            for line in handle:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    def entries_for(self, event: str) -> List[Dict[str, Any]]:
        return [e for e in self.entries() if e.get("event") == event]
