import argparse
import logging
import sys

from .encoders import DEFAULT_MODEL, ModelUnavailableError
from .export import ExportJob, run_export


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="scibert-export",
        description="Export mean-pooled sentence embeddings of paper "
        "titles+abstracts to the PGEM binary format.",
    )
    parser.add_argument("--input", required=True, help="corpus JSON file")
    parser.add_argument("--output", required=True, help="output .pgem path")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="pretrained model name")
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument(
        "--backend", choices=["transformer", "hashed"], default="transformer",
        help="'hashed' is a deterministic offline stand-in for format tests; "
        "its vectors are NOT semantic embeddings",
    )
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    job = ExportJob(
        input_path=args.input,
        output_path=args.output,
        model_name=args.model,
        batch_size=args.batch_size,
        backend=args.backend,
    )
    try:
        result = run_export(job)
    except ModelUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {result.n_rows} rows to {args.output} "
        f"({result.n_truncated} truncated, {len(result.skipped)} skipped)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
