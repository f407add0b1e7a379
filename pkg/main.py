import os

import logfire

from app.cli import cli

logfire.configure(
    send_to_logfire="if-token-present",
    token=os.getenv("LOGFIRE_TOKEN"),
    console=False,
)


if __name__ == "__main__":
    cli()
