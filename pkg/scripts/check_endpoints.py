#!/usr/bin/env python3
"""
Smoke-test a running spikelab backend: every endpoint with a small valid body.

Usage:
    uvicorn backend.app:app --port 8000
    python scripts/check_endpoints.py [--base-url=http://localhost:8000]
"""

import argparse
import sys
from typing import Any, Dict, List, Optional, Tuple

import httpx


ENDPOINTS: List[Tuple[str, str, Optional[Dict[str, Any]]]] = [
    ("POST", "/api/ground-state", {"N": 1, "p": 3, "radii": [0.0, 1.0]}),
    ("POST", "/api/evaluate", {"N": 3, "p": 3, "V": "1+x1^2", "point": [1, 0, 0], "assumption_samples": 1000}),
    ("POST", "/api/constants", {"N": 3, "p": 3, "point": [0, 0, 1], "assumption_samples": 1000}),
    ("POST", "/api/predict", {"N": 3, "p": 3, "V": "1+x1^2", "seeds": 20, "assumption_samples": 1000}),
    ("GET", "/reports/runs", None),
    ("GET", "/reports/usage", None),
    ("GET", "/metrics", None),
    ("GET", "/openapi.json", None),
]


def check_endpoint(client: httpx.Client, method: str, path: str, body: Optional[Dict]) -> Tuple[bool, str, int]:
    try:
        response = client.request(method, path, json=body)
    except httpx.TimeoutException:
        return False, "Timeout", 0
    except httpx.ConnectError:
        return False, "Connection Error (is server running?)", 0
    status = response.status_code
    if status == 200:
        return True, "OK", status
    return False, response.text[:120], status


def main() -> None:
    parser = argparse.ArgumentParser(description="Smoke-test the spikelab API")
    parser.add_argument("--base-url", type=str, default="http://localhost:8000")
    parser.add_argument("--timeout", type=float, default=600.0, help="per-request timeout in seconds")
    args = parser.parse_args()

    print(f"Testing endpoints against {args.base_url}\n")
    print(f"{'Method':<8} {'Path':<22} {'Status':<8} {'Result'}")
    print("=" * 60)

    failed = []
    with httpx.Client(base_url=args.base_url, timeout=args.timeout) as client:
        for method, path, body in ENDPOINTS:
            ok, message, status = check_endpoint(client, method, path, body)
            print(f"{method:<8} {path:<22} {status:<8} {'PASS' if ok else 'FAIL ' + message}")
            if not ok:
                failed.append((method, path, message))

    print("\n" + "=" * 60)
    print(f"Summary: {len(ENDPOINTS) - len(failed)}/{len(ENDPOINTS)} passed")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
