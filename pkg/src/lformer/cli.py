#!/usr/bin/env python3
"""CLI for pan-sharpening experiments: data generation, training, evaluation, benchmarking and reports.

Exit codes: 0 success, 1 usage or configuration error, 2 data error, 3 numeric failure.
"""

import logging
import sys
from typing import Any

import click

from .bin.cli_bench import bench
from .bin.cli_eval import evaluate
from .bin.cli_gen_data import gen_data
from .bin.cli_report import report
from .bin.cli_train import train
from .core.errors import DataError, LFormerError

logger = logging.getLogger(__name__)


class ExitCodeGroup(click.Group):
    """Click group that turns library errors into the documented exit codes"""

    def main(self, *args: Any, **kwargs: Any) -> Any:
        kwargs["standalone_mode"] = False
        try:
            result = super().main(*args, **kwargs)
        except click.exceptions.Exit as e:
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        except click.ClickException as e:
            e.show()
            sys.exit(1)
        except LFormerError as e:
            logger.debug("Command failed", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except OSError as e:
            logger.debug("I/O failure", exc_info=True)
            click.echo(f"Error: {DataError.prefix}: {e}", err=True)
            sys.exit(DataError.exit_code)
        if isinstance(result, int) and result != 0:
            sys.exit(result)
        return result


@click.group(cls=ExitCodeGroup)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="WARNING",
    help="Logging verbosity",
)
def cli(log_level):
    """Pan-sharpening with linearly evolved attention."""
    logging.basicConfig(level=log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")


cli.add_command(gen_data, name="gen-data")
cli.add_command(train)
cli.add_command(evaluate, name="eval")
cli.add_command(bench)
cli.add_command(report)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
