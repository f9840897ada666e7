"""Entry point: `python -m neural_bridge [--config config.json]`."""

import argparse
import json
import sys

from .config import BridgeServerConfig, ConfigError
from .server import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="neural_bridge",
        description="serve generator/classifier/embedder models over stdio",
    )
    parser.add_argument("--config", help="JSON config; omit for the built-in toy models")
    args = parser.parse_args(argv)
    try:
        if args.config:
            config = BridgeServerConfig.from_file(args.config)
        else:
            config = BridgeServerConfig()
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        sys.stdout.write(json.dumps({"ready": False, "error": str(exc)}) + "\n")
        sys.stdout.flush()
        return 1
    return serve(config)


if __name__ == "__main__":
    raise SystemExit(main())
