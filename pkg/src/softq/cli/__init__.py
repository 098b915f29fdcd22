"""Entradas de linea de comandos para softq."""
