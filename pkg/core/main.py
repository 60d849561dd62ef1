import sys


def main() -> None:
    from backend.cli.app import run

    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
