"""Estructuras hamiltonianas de la teoría cinética: álgebras de observables, corchetes de
Lie-Poisson y dinámica de N cuerpos / Vlasov."""

__version__ = "1.0"
