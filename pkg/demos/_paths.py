"""Where the demos write their artifacts (``IGBSS_DEMO_OUT``, default ``demos/output``)."""
import os
from pathlib import Path

OUT = Path(os.environ.get("IGBSS_DEMO_OUT", Path(__file__).parent / "output"))
OUT.mkdir(parents=True, exist_ok=True)
