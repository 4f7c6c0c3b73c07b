#!/usr/bin/env python3
"""
Build the canonical covering-code family in parallel.

Every (n, r) with 1 <= n <= N and 1 <= r <= ceil(n/2) is searched once and
written to the code cache (DIMCODES_CACHE_DIR, default ~/.cache/dimcodes),
so later runs of the codeword and lowering commands start warm.

Usage:
    python utils/build_code_family.py [max_n] [workers]

Example:
    python utils/build_code_family.py 12 4
"""

import os
import sys
import time
from datetime import datetime
from multiprocessing import Process, Queue

script_dir = os.path.dirname(os.path.abspath(__file__))
project_root = os.path.dirname(script_dir)
sys.path.insert(0, project_root)

from dimcodes import settings  # noqa: E402
from dimcodes.covercode import canonical_code, code_path  # noqa: E402
from dimcodes.exceptions import DimcodesError  # noqa: E402


def family_jobs(max_n):
    """All (n, r) pairs of the family, largest searches first."""
    jobs = [(n, r) for n in range(1, max_n + 1) for r in range(1, (n + 1) // 2 + 1)]
    return sorted(jobs, key=lambda job: (-job[0], job[1]))


def build_one(n, r, worker, queue):
    """
    Search (or load) the canonical code for one (n, r).

    Args:
        n: Block length
        r: Covering radius
        worker: Worker number, for the progress line
        queue: Queue to store results
    """
    start_time = time.time()
    try:
        code = canonical_code(n, r)
        elapsed_time = time.time() - start_time
        print(f"[Worker {worker}] ✅ n={n:2d} r={r:2d} seed={code.seed:2d} S={code.size} in {elapsed_time:.2f}s")
        queue.put(("success", n, r, code.seed, code.size, elapsed_time))
    except DimcodesError as e:
        elapsed_time = time.time() - start_time
        print(f"[Worker {worker}] ❌ n={n:2d} r={r:2d} failed: {e}")
        queue.put(("failed", n, r, None, None, elapsed_time))


def run_batch(jobs, worker, queue):
    # One process per batch; the disk cache is shared through its file lock
    settings.SHOW_PROGRESS = False
    for n, r in jobs:
        build_one(n, r, worker, queue)


def main():
    max_n = int(sys.argv[1]) if len(sys.argv) > 1 else settings.CHUNK_CAP
    num_workers = int(sys.argv[2]) if len(sys.argv) > 2 else min(4, os.cpu_count() or 1)

    if not 1 <= max_n <= settings.EXHAUSTIVE_CAP:
        print(f"[ERROR] max_n must be in [1, {settings.EXHAUSTIVE_CAP}] (got {max_n})")
        print("[INFO] Raise DIMCODES_EXHAUSTIVE_CAP to search longer blocks")
        sys.exit(1)

    jobs = family_jobs(max_n)
    cache_dir = settings.code_cache_dir()

    print("=" * 80)
    print("🧮 CANONICAL COVERING-CODE FAMILY")
    print("=" * 80)
    print(f"Block lengths:           1..{max_n}")
    print(f"(n, r) pairs:            {len(jobs)}")
    print(f"Workers:                 {num_workers}")
    print(f"Cache directory:         {cache_dir}")
    print(f"Start time:              {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print("=" * 80)
    print()

    # Round-robin so every worker gets a share of the long searches
    batches = [jobs[i::num_workers] for i in range(num_workers)]
    batches = [batch for batch in batches if batch]

    result_queue = Queue()
    overall_start_time = time.time()

    processes = []
    for worker, batch in enumerate(batches, 1):
        process = Process(target=run_batch, args=(batch, worker, result_queue))
        process.start()
        processes.append(process)

    print(f"[INFO] All {len(processes)} workers started.\n")

    # Drain while waiting so a full queue never blocks a worker
    results = []
    while len(results) < len(jobs) and any(p.is_alive() for p in processes):
        while not result_queue.empty():
            results.append(result_queue.get())
        time.sleep(0.1)
    for process in processes:
        process.join()
    while not result_queue.empty():
        results.append(result_queue.get())

    total_time = time.time() - overall_start_time
    success = sorted((r for r in results if r[0] == "success"), key=lambda r: (r[1], r[2]))
    failed = sorted((r[1], r[2]) for r in results if r[0] != "success")
    missing = sorted(set(jobs) - {(r[1], r[2]) for r in results})

    print("\n" + "=" * 80)
    print("EXECUTION SUMMARY")
    print("=" * 80)
    print(f"(n, r) pairs:            {len(jobs)}")
    print(f"Built or loaded:         {len(success)}")
    print(f"Failed:                  {len(failed) + len(missing)}")
    print(f"Total execution time:    {total_time:.2f}s ({total_time / 60:.2f} minutes)")
    print(f"End time:                {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print("=" * 80)

    print("\n" + "-" * 80)
    print(f"{'n':>4} {'r':>4} {'seed':>6} {'S':>8}   file")
    print("-" * 80)
    for _, n, r, seed, size, _ in success:
        print(f"{n:4d} {r:4d} {seed:6d} {size:8d}   {os.path.basename(code_path(n, r, cache_dir))}")

    if failed or missing:
        print("\n" + "=" * 80)
        print(f"⚠️  FAILED PAIRS ({len(failed) + len(missing)})")
        print("=" * 80)
        for n, r in failed + missing:
            print(f"  n={n} r={r}")
        sys.exit(1)

    print(f"\n[SUCCESS] {len(success)} codes in {cache_dir}")
    sys.exit(0)


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        print("\n\n[INFO] Interrupted by user")
        sys.exit(130)
    except Exception as e:
        print(f"\n[ERROR] Unexpected error: {e}")
        sys.exit(1)
