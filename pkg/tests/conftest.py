import sys
from pathlib import Path

# Make instances.py importable regardless of the pytest import mode.
sys.path.insert(0, str(Path(__file__).parent))
