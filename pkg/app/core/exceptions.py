"""
Custom exceptions
"""


class OsaKitError(Exception):
    """Erro base do kit; exit_code é o código de saída da CLI"""
    exit_code = 2


class UsageError(OsaKitError):
    """Uso incorreto (argumentos, arquivo de configuração)"""
    exit_code = 1


class DataError(OsaKitError):
    """Dados de entrada inválidos ou insuficientes"""
    exit_code = 2


class NumericError(OsaKitError):
    """Falha numérica (variância nula, perda não finita, etc.)"""
    exit_code = 3


# --- CONFIGURAÇÃO ---
class UnknownConfigKey(UsageError):
    """Chave desconhecida no arquivo de configuração"""
    pass


class InvalidConfig(UsageError):
    """Configuração fora dos limites permitidos"""
    pass


class RunNotFound(UsageError):
    """Diretório de execução inexistente"""
    pass


# --- EDF / ANOTAÇÕES ---
class MalformedHeader(DataError):
    """Cabeçalho EDF não ASCII ou com campos inconsistentes"""
    pass


class TruncatedData(DataError):
    """Arquivo EDF com menos bytes do que o cabeçalho promete"""
    pass


class DegenerateCalibration(DataError):
    """digital_min igual a digital_max (ou physical_min igual a physical_max)"""
    pass


class RangeOverflow(DataError):
    """Valor físico fora da faixa digital do canal"""
    pass


class MalformedXml(DataError):
    """XML de anotações inválido"""
    pass


class MissingField(DataError):
    """Evento sem Start ou Duration"""
    pass


class NegativeAhi(DataError):
    """AHI negativo"""
    pass


# --- SINAIS ---
class InvalidFrequency(DataError):
    """Frequência fora de (0, Nyquist)"""
    pass


class EmptyInput(DataError):
    """Sinal vazio"""
    pass


class DegenerateWindow(NumericError):
    """Janela com desvio padrão nulo"""
    pass


class TooFewPeaks(DataError):
    """Picos R insuficientes na janela"""
    pass


class EmptySeries(DataError):
    """Série vazia"""
    pass


class TooShort(DataError):
    """Série curta demais para a operação"""
    pass


class DegenerateSeries(NumericError):
    """Série com variância nula"""
    pass


class ZeroTotalPower(NumericError):
    """Potência total nula nas bandas VLF/LF/HF"""
    pass


# --- SVM ---
class EmptyTrainingSet(DataError):
    """Conjunto de treino vazio"""
    pass


class EmptyFeatureSpace(DataError):
    """Todas as features têm variância nula"""
    pass


class SingleClassData(DataError):
    """Treino com uma única classe"""
    pass


class NonFiniteFeature(DataError):
    """Feature NaN ou infinita"""
    pass


class DimensionMismatch(DataError):
    """Vetor com dimensão diferente da do modelo"""
    pass


# --- REDE NEURAL ---
class ShapeMismatch(DataError):
    """Formatos de tensores incompatíveis"""
    pass


class TinyBatch(DataError):
    """Batch normalization em treino exige batch >= 2"""
    pass


class NonFiniteLoss(NumericError):
    """Perda NaN/inf durante o treino"""
    pass


# --- AVALIAÇÃO ---
class InsufficientSamples(DataError):
    """Classe com menos janelas do que o pedido"""
    pass


class TooFewSamples(DataError):
    """Amostras insuficientes para os folds"""
    pass


class EmptyClass(DataError):
    """Matriz de confusão sem exemplos de uma das classes"""
    pass


class TooFewRows(DataError):
    """Agregação exige pelo menos duas linhas"""
    pass


class LengthMismatch(DataError):
    """Listas pareadas com tamanhos diferentes"""
    pass


class DegenerateVariance(NumericError):
    """Diferenças pareadas com variância nula"""
    pass


class IncompleteTable(DataError):
    """Tabela de resultados incompleta"""
    pass
