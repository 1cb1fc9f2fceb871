"""Worker-pool services behind the CLI subcommands"""
