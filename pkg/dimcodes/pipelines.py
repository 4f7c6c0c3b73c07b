# Export pipelines
#
# Every artifact goes through one of these: open, feed records with
# process_item, close. Files are written to a temporary name and renamed, so a
# reader never sees half an artifact. Metadata (tool version, parameters,
# seeds) is embedded in every file and no timestamps are, so reruns are
# byte-identical.

import io
import json
import os
import sys

import pandas as pd

from . import settings


def artifact_metadata(command, params, seeds):
    return {
        "tool": settings.TOOL_NAME,
        "version": settings.TOOL_VERSION,
        "command": command,
        "params": {k: _plain(v) for k, v in sorted(params.items())},
        "seeds": [int(s) for s in seeds],
    }


def _plain(value):
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


def write_atomic(path, data):
    """Write text or bytes to path via a temporary file and rename."""
    if path in (None, "-"):
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as f:
        f.write(data)
    os.replace(tmp, path)


class CsvExportPipeline:
    """Rows as CSV: '#' metadata lines, header row, 6 significant digits."""

    def __init__(self, path, model, metadata):
        self.path = path
        self.header = model.columns()
        self.metadata = metadata

    def open_export(self):
        self.items = []

    def process_item(self, item):
        self.items.append(item.model_dump())
        return item

    def close_export(self):
        buffer = io.StringIO()
        buffer.write(f"# {self.metadata['tool']} {self.metadata['version']} {self.metadata['command']}\n")
        buffer.write("# params=" + json.dumps(self.metadata["params"], sort_keys=True) + "\n")
        buffer.write("# seeds=" + json.dumps(self.metadata["seeds"]) + "\n")
        frame = pd.DataFrame(self.items, columns=self.header)
        frame.to_csv(buffer, index=False, float_format=settings.CSV_FLOAT_FORMAT, lineterminator="\n")
        write_atomic(self.path, buffer.getvalue())
        return self.path


class JsonExportPipeline:
    """Rows as one JSON document {"meta": ..., "records": [...]}."""

    def __init__(self, path, model, metadata):
        self.path = path
        self.metadata = metadata

    def open_export(self):
        self.items = []

    def process_item(self, item):
        self.items.append(item.model_dump(mode="json"))
        return item

    def close_export(self):
        document = {"meta": self.metadata, "records": self.items}
        write_atomic(self.path, json.dumps(document, indent=settings.JSON_INDENT) + "\n")
        return self.path


PIPELINES = {"csv": CsvExportPipeline, "json": JsonExportPipeline}


def export_records(path, fmt, model, records, metadata):
    """Run records through the pipeline for ``fmt`` and return the artifact path."""
    pipeline = PIPELINES[fmt](path, model, metadata)
    pipeline.open_export()
    for record in records:
        pipeline.process_item(record)
    return pipeline.close_export()


def export_document(path, document, metadata):
    """A single JSON object (schedules, summaries) with the usual metadata."""
    payload = {"meta": metadata}
    payload.update(document)
    write_atomic(path, json.dumps(payload, indent=settings.JSON_INDENT) + "\n")
    return path
