import json
import logging
import os

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = '%.17g'


class ArtifactStore:
    """Owns one run's output directory: CSV tables and summary.json"""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        os.makedirs(self.out_dir, exist_ok=True)
        self.written = []

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def write_csv(self, name, frame):
        """Write a DataFrame with a header row, '\\n' line endings and 17 significant digits"""
        filepath = self.path(name)
        try:
            frame.to_csv(filepath, index=False, float_format=CSV_FLOAT_FORMAT,
                         lineterminator='\n', encoding='utf-8')
        except Exception as e:
            logger.error(f"Error writing {filepath}: {str(e)}")
            raise
        self.written.append(name)
        logger.info(f"Wrote {len(frame)} rows to {filepath}")
        return filepath

    def write_summary(self, summary):
        """Write summary.json with sorted keys and no timestamps"""
        filepath = self.path('summary.json')
        try:
            json_data = json.dumps(_plain(summary), indent=2, sort_keys=True, allow_nan=True)
            with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
                f.write(json_data + '\n')
        except Exception as e:
            logger.error(f"Error writing summary {filepath}: {str(e)}")
            raise
        logger.info(f"Summary written to {filepath}")
        return filepath

    def load_summary(self):
        filepath = self.path('summary.json')
        if not os.path.exists(filepath):
            logger.warning(f"Summary file not found: {filepath}")
            return None
        with open(filepath, encoding='utf-8') as f:
            return json.load(f)


def _plain(value):
    """Convert numpy scalars and tuples so json can serialize them"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, 'item') and callable(value.item):
        return value.item()
    return value
