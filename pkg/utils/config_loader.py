import os
from pathlib import Path

import yaml
from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG = PROJECT_ROOT / "config.yaml"


def load_config(path: str = str(DEFAULT_CONFIG)) -> dict:
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found at {config_path}")
    with open(config_path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def fixtures_dir(cfg: dict, override: str = None) -> Path:
    """
    Fixture directory: explicit override, then MODLIE_FIXTURES (.env honoured), then config

    Relative paths are resolved against the project root.
    """
    load_dotenv(PROJECT_ROOT / ".env")
    raw = override or os.getenv("MODLIE_FIXTURES") or cfg.get("fixtures", {}).get("dir", "./data/fixtures")
    path = Path(raw)
    return path if path.is_absolute() else PROJECT_ROOT / path


if __name__ == "__main__":
    cfg = load_config()
    print("✅ Config loaded successfully:")
    print(cfg)
