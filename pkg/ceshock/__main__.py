"""The main entry point to CEShock."""

from ceshock import run

if __name__ == "__main__":
    run()
