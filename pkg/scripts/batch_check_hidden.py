"""Run the hidden-measurement criteria over a manifest of instance files.

The manifest is a CSV with an ``id`` column and a ``path`` column pointing at
instance JSON files (relative paths are resolved against the manifest's
directory). One output row is written per manifest row.

Example:
    python scripts/batch_check_hidden.py --input manifest.csv --output verdicts.csv
"""

import os
import sys
import argparse
from pathlib import Path
from typing import Optional, Tuple

import pandas as pd
from tqdm import tqdm

# Add parent directory to path to enable importing the qpvlab package
sys.path.insert(0, str(Path(__file__).parent.parent.absolute()))

from qpvlab.hmc import check_all, load_instance
from qpvlab.logging_config import logger, setup_logging
from qpvlab.utils import read_json

COLUMNS = [
    'id', 'path', 'is_hidden', 'agree', 'dist_v1', 'dist_v2',
    'xy_residual_v1', 'xy_residual_v2', 'block_residual_v1', 'block_residual_v2', 'error',
]


def setup_arg_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        description="Check a manifest of instances for the hidden-measurement property",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument(
        "--input",
        type=str,
        default="manifest.csv",
        help="Path to manifest CSV with id and path columns"
    )
    parser.add_argument(
        "--output",
        type=str,
        default="verdicts.csv",
        help="Path to output CSV file for verdicts"
    )
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="Verdict tolerance (QPVLAB_VERDICT_TOL if omitted)"
    )
    return parser


def validate_files(input_path: str, output_path: str) -> Tuple[bool, Optional[str]]:
    """Validate input and output file paths.

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not os.path.exists(input_path):
        return False, f"Input file not found: {input_path}"

    if not input_path.endswith('.csv'):
        return False, f"Input file must be CSV format: {input_path}"

    output_dir = os.path.dirname(output_path)
    if output_dir and not os.path.exists(output_dir):
        return False, f"Output directory does not exist: {output_dir}"

    return True, None


def process_row(row: pd.Series, base_dir: Path, tol: Optional[float] = None) -> dict:
    """Check one instance; failures yield a row with empty verdicts and the error text."""
    path = base_dir / str(row['path'])
    try:
        verdicts = check_all(load_instance(read_json(path)), tol)
        d1 = verdicts['definition1']
        xy = verdicts['xy_equations']
        block = verdicts['block_equations']
        return {
            'id': row['id'],
            'path': row['path'],
            'is_hidden': d1.is_hidden,
            'agree': len({v.is_hidden for v in verdicts.values()}) == 1,
            'dist_v1': d1.dist_v1,
            'dist_v2': d1.dist_v2,
            'xy_residual_v1': xy.residual_v1,
            'xy_residual_v2': xy.residual_v2,
            'block_residual_v1': block.residual_v1,
            'block_residual_v2': block.residual_v2,
            'error': None,
        }

    except Exception as e:
        logger.error(f"Error processing row {row['id']}: {str(e)}")
        sentinel = dict.fromkeys(COLUMNS)
        sentinel.update({'id': row['id'], 'path': row['path'], 'error': str(e)})
        return sentinel


def process_manifest(input_file: str, output_file: str, tol: Optional[float] = None) -> bool:
    """Check every instance listed in ``input_file`` and write the verdict table.

    Returns:
        True if processing successful, False otherwise
    """
    try:
        is_valid, error = validate_files(input_file, output_file)
        if not is_valid:
            logger.error(error)
            return False

        logger.info(f"Reading manifest from {input_file}")
        df = pd.read_csv(input_file)
        missing = {'id', 'path'} - set(df.columns)
        if missing:
            logger.error(f"Manifest lacks columns: {sorted(missing)}")
            return False

        base_dir = Path(input_file).parent
        results = []
        for _, row in tqdm(df.iterrows(), total=len(df), desc="Checking"):
            results.append(process_row(row, base_dir, tol))

        output_df = pd.DataFrame(results, columns=COLUMNS)
        output_df.to_csv(output_file, index=False)

        logger.info(f"Checked {len(output_df):,} instances, {int(output_df['is_hidden'].eq(True).sum()):,} hidden")
        logger.info(f"Results saved to {output_file}")

        return True

    except Exception as e:
        logger.exception(f"Error processing manifest: {str(e)}")
        return False


if __name__ == "__main__":
    parser = setup_arg_parser()
    args = parser.parse_args()

    setup_logging()
    success = process_manifest(args.input, args.output, args.tol)
    sys.exit(0 if success else 1)
