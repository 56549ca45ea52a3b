"""Run the service: python -m presb.service [--host H] [--port P]."""

import argparse

import uvicorn


def main():
    ap = argparse.ArgumentParser(prog="presb-service")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8071)
    args = ap.parse_args()
    uvicorn.run("presb.service.app:app", host=args.host, port=args.port)


if __name__ == "__main__":
    main()
