"""Command-line entry point: wire stores, rules and shapes into the
HTTP service. Every flag has an ``HT_``-prefixed environment variable
equivalent (e.g. ``HT_PORT``)."""

from __future__ import annotations

import logging
import pathlib
from typing import Optional

import click

from .display import parse_config
from .service import CurationService
from .shapes import parse_shapes
from .store import memory_handle, remote_handle
from .turtle import parse_turtle


@click.command(context_settings={"auto_envvar_prefix": "HT"})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="YAML display-rule configuration file.")
@click.option("--shapes", "shapes_path", type=click.Path(exists=True, dir_okay=False),
              help="Turtle file with the validation shapes.")
@click.option("--data-endpoint", help="SPARQL endpoint for the data store (query URL; "
              "the update URL is derived by appending /update unless given as URL,URL).")
@click.option("--prov-endpoint", help="SPARQL endpoint for the provenance store.")
@click.option("--memory", is_flag=True, help="Use embedded in-memory stores.")
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--base-iri", default="https://example.org", show_default=True,
              help="Base IRI for newly minted entities.")
@click.option("--token", "tokens", multiple=True,
              help="Auth stub entry TOKEN=AGENT_IRI; repeatable. "
              "Without any, the service is open and edits are anonymous.")
@click.option("--static-dir", type=click.Path(exists=True, file_okay=False),
              help="Directory with the web interface bundle, served under /.")
def main(
    config_path: Optional[str],
    shapes_path: Optional[str],
    data_endpoint: Optional[str],
    prov_endpoint: Optional[str],
    memory: bool,
    port: int,
    host: str,
    base_iri: str,
    tokens: tuple[str, ...],
    static_dir: Optional[str],
) -> None:
    """Run the curation service."""
    logging.basicConfig(level=logging.INFO)
    if memory == bool(data_endpoint):
        raise click.UsageError("choose exactly one of --memory or --data-endpoint")
    if data_endpoint and not prov_endpoint:
        raise click.UsageError("--data-endpoint requires --prov-endpoint")

    def handle(endpoint: Optional[str]):
        if memory:
            return memory_handle()
        if "," in endpoint:
            query_url, update_url = endpoint.split(",", 1)
        else:
            query_url, update_url = endpoint, endpoint.rstrip("/") + "/update"
        return remote_handle(query_url, update_url)

    data = handle(data_endpoint).open()
    prov = handle(prov_endpoint).open()

    rules = parse_config(pathlib.Path(config_path).read_text()) if config_path else []
    schemas = (
        parse_shapes(parse_turtle(pathlib.Path(shapes_path).read_text()))
        if shapes_path
        else []
    )
    token_map = {}
    for entry in tokens:
        if "=" not in entry:
            raise click.UsageError("--token expects TOKEN=AGENT_IRI")
        token, agent = entry.split("=", 1)
        token_map[token] = agent

    service = CurationService(
        data, prov, rules=rules, schemas=schemas, base_iri=base_iri, tokens=token_map
    )
    from .api import create_app

    app = create_app(service, static_dir=static_dir)
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
