"""Entry point for: python -m latininf"""

from latininf.cli import cli

if __name__ == "__main__":
    cli()
